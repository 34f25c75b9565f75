use thiserror::Error;

/// Everything that can go wrong while parsing, checking, counting or sampling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("illegal decomposition tree: {0}")]
    Illegal(String),

    #[error("not Eulerian: {0}")]
    NotEulerian(String),

    #[error("recognition failed: {0}")]
    Recognition(String),

    /// A per-term evaluation that must be a non-negative integer was not.
    #[error("arithmetic invariant violated: {0}")]
    Arithmetic(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("refusing to enumerate: {edges} edges exceeds bound {bound}")]
    BoundExceeded { edges: usize, bound: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
