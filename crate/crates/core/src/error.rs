use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("network has no nodes")]
    EmptyNetwork,

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid adjacency entry at ({row}, {col}): {value}")]
    InvalidAdjacency { row: usize, col: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("node {node} belongs to no network")]
    OrphanNode { node: usize },

    #[error("network {network} references unknown or inconsistent node {node}")]
    InconsistentMembership { network: usize, node: usize },

    #[error("membership profile is infeasible: {0}")]
    InfeasibleProfile(String),

    #[error("simulation diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("exhaustive search is capped at {cap} nodes, got {n}")]
    SizeCap { n: usize, cap: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
