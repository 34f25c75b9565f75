//! `gsp-euler`: count and sample Euler tours of GSP multigraphs.
//!
//! Exit codes: 0 success, 1 usage, 2 input (I/O or format), 3 illegal tree
//! or no Euler tour, 4 recognition failure, 5 internal check failure.

use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use gsp_euler::oracle::{DEFAULT_BOUND, HARD_CAP};
use gsp_euler::verify::verify_tables;
use gsp_euler::{build_tables, recognize, sample_stream, DecompTree, Error, Multigraph, Sampler};

#[derive(Parser)]
#[command(name = "gsp-euler", version, about = "Exact Euler tour counting and uniform sampling on GSP multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the number of Euler tours of the graph a tree realizes.
    Count {
        /// Tree file (`-` for standard input).
        tree: PathBuf,
    },
    /// Print uniformly random Euler tours, one per line.
    Sample {
        tree: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, value_enum, default_value_t = Emit::Edges)]
        emit: Emit,
    },
    /// Cross-check the count and the decomposition table against brute force.
    Verify {
        tree: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BOUND, value_parser = parse_bound)]
        max_edges: usize,
        /// Perturb the root table before checking.
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Print the graph a tree realizes.
    Realize { tree: PathBuf },
    /// Print a tree realizing a graph file.
    Recognize { graph: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    /// `label:+` or `label:-` per step, comma separated.
    Edges,
    /// Closed walk of vertex ids, space separated.
    Vertices,
}

fn parse_bound(s: &str) -> Result<usize, String> {
    let b: usize = s.parse().map_err(|e| format!("{e}"))?;
    if b == 0 || b > HARD_CAP {
        return Err(format!("must be between 1 and {HARD_CAP}"));
    }
    Ok(b)
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::InvalidGraph(_) | Error::UnknownVertex(_) => 2,
            Error::Illegal(_) | Error::NotEulerian(_) => 3,
            Error::Recognition(_) => 4,
            Error::BoundExceeded { .. } => 1,
            Error::Arithmetic(_) | Error::Contract(_) => 5,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        })?;
    }
    Ok(text)
}

fn read_tree(path: &Path) -> Result<DecompTree, Failure> {
    Ok(DecompTree::parse(&read_input(path)?)?)
}

fn run(command: Command, out: &mut impl Write) -> Result<(), Failure> {
    match command {
        Command::Count { tree } => {
            let tree = read_tree(&tree)?;
            writeln!(out, "{}", gsp_euler::count_tours(&tree)?)?;
        }
        Command::Sample { tree, seed, samples, emit } => {
            let tree = read_tree(&tree)?;
            let sampler = Sampler::new(&tree)?;
            for i in 0..samples {
                let tour = sampler.sample(&mut sample_stream(seed, i))?;
                match emit {
                    Emit::Edges => writeln!(out, "{}", tour.edge_string())?,
                    Emit::Vertices => writeln!(out, "{}", tour.vertex_string(sampler.graph()))?,
                }
            }
        }
        Command::Verify { tree, max_edges, corrupt } => {
            let tree = read_tree(&tree)?;
            let mut tables = build_tables(&tree)?;
            if corrupt {
                let root = tables.root();
                let k = root.kappa().iter().next().expect("kappa is never empty");
                let bumped = root.get(k) + BigUint::from(1u32);
                tables.corrupt(tree.root(), k, bumped)?;
            }
            let report = verify_tables(&tree, &tables, max_edges)?;
            write!(out, "{report}")?;
            if !report.passed() {
                return Err(Failure { code: 5, message: "verification failed".into() });
            }
        }
        Command::Realize { tree } => {
            let tree = read_tree(&tree)?;
            write!(out, "{}", tree.realize().graph)?;
        }
        Command::Recognize { graph } => {
            let graph = Multigraph::parse(&read_input(&graph)?)?;
            writeln!(out, "{}", recognize(&graph)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(f), _) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        (Ok(()), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
