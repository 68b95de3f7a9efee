use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the feasibility toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: edge list contains no edges and no node-count header")]
    EmptyGraph(PathBuf),

    #[error("node index {index} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },

    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resolution mismatch: {0} vs {1}; resample to a common resolution first")]
    ResolutionMismatch(usize, usize),

    #[error("weights are not on the probability simplex: {0}")]
    NotOnSimplex(String),

    #[error("graphon resolution {resolution} exceeds the cap of {cap} for {operation}; resample to a coarser grid")]
    ResolutionCap {
        operation: &'static str,
        resolution: usize,
        cap: usize,
    },

    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
