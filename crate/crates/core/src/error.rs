use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Total variance is zero, so FVU (and PC1) are undefined.
    #[error("degenerate dataset")]
    DegenerateDataset,

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),

    #[error("node {0} is not a leaf")]
    NotALeaf(usize),

    #[error("operation needs at least {needed} nodes, graph has {found}")]
    TooFewNodes { needed: usize, found: usize },

    #[error("partition does not match graph and data: {0}")]
    InconsistentPartition(String),

    #[error("elastic system is singular")]
    SingularSystem,

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
