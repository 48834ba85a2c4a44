use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::SolverTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the field bounds")]
    OutOfDomain { x: f64, y: f64 },

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid risk field: {0}")]
    InvalidField(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("network construction failed: {0}")]
    Construction(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible pruning: alpha threshold {threshold} disconnects origin from destination")]
    InfeasiblePruning { threshold: f64 },

    #[error("planning failed: {0}")]
    Planning(String),

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("flow contains a directed cycle through node {node}")]
    CyclicFlow { node: usize },

    #[error(
        "{solver} solver reached its iteration cap ({iterations} iterations, final gap {gap:e})"
    )]
    IterationCap {
        solver: SolverTag,
        iterations: usize,
        gap: f64,
    },

    #[error("{solver} solver failed after {iterations} iterations: {message}")]
    Solver {
        solver: SolverTag,
        iterations: usize,
        message: String,
    },

    #[error("{solver} solver: problem is {status}")]
    NotOptimal {
        solver: SolverTag,
        status: crate::SolveStatus,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(
        path: &std::path::Path,
        line: usize,
        column: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: message.into(),
        }
    }
}
