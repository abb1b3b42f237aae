use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate edge {u} -- {v}")]
    DuplicateEdge { line: usize, u: String, v: String },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: String },

    #[error("line {line}: edge weight must be positive, got {weight}")]
    InvalidWeight { line: usize, weight: f64 },

    #[error("unknown node label {0:?}")]
    UnknownLabel(String),

    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("node {0} appears in more than one block")]
    OverlappingBlocks(usize),

    #[error("duplicate row for node {0:?}")]
    DuplicateRow(String),

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node universes differ ({0} vs {1} nodes)")]
    UniverseMismatch(usize, usize),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("feature width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("invalid model file: {0}")]
    Model(String),

    #[error("config: {0}")]
    Config(String),

    #[error("every benchmark cell failed ({0} cells)")]
    AllCellsFailed(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
