//! Exact counting and exactly uniform sampling of Euler tours on generalized
//! series-parallel multigraphs, driven by a binary decomposition tree.
//!
//! The pipeline is: parse or build a [`DecompTree`], check it with
//! [`DecompTree::check_legal`], compute per-node decomposition counts with
//! [`build_tables`], then either sum them into a tour count
//! ([`count_tours`]) or walk them top-down to draw tours ([`Sampler`]).
//! The [`oracle`] module is an independent brute-force reference for small
//! graphs.

pub mod error;
pub mod gamma;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod recognize;
pub mod sampler;
pub mod trail;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use gamma::{build_tables, count_tours, GammaTable, GammaTables, KappaSet};
pub use graph::{EdgeLabel, Multigraph, VertexId};
pub use recognize::recognize;
pub use sampler::{sample_stream, sample_tour, sample_tours, Sampler};
pub use trail::{Decomposition, Direction, EulerTour, Step, Trail};
pub use tree::{DecompTree, NodeId, Op, TreeBuilder};
