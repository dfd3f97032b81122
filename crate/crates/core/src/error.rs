//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel generator: ({0}, {1}) is not primitive")]
    InvalidKernelGenerator(i64, i64),

    #[error("not a frame: ({f1}, {f2}) with kernel generator ({v1}, {v2}) has determinant {det}")]
    NotAFrame { f1: i64, f2: i64, v1: i64, v2: i64, det: i64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("curve is not closed: {0}")]
    OpenCurve(String),

    #[error("curve is not contained in L′: {0}")]
    NotInCollar(String),

    #[error("curves are not disjoint: {0}")]
    NotDisjoint(String),

    /// Generic position could not be reached; carries the seeds that were tried.
    #[error("degenerate geometry after {} attempts (seeds {seeds:?}): {msg}", seeds.len())]
    Degenerate { msg: String, seeds: Vec<u64> },

    #[error("internal soundness failure: chain method gave {chain}, embedding method gave {embedding}")]
    MethodDisagreement { chain: i64, embedding: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid t-data: {0}")]
    InvalidTData(String),

    #[error("non-transverse configuration on cell {cell} along edge {edge}: {msg}")]
    NonTransverse { cell: usize, edge: usize, msg: String },

    #[error("reduction obstruction on cell {cell}: {msg}")]
    Obstruction { cell: usize, msg: String },

    #[error("bounds exceeded: {0}")]
    Bounds(String),

    #[error("boundary identity violated at {0} graph(s)")]
    SystemViolations(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Degenerate { .. } => 2,
            _ => 1,
        }
    }
}
