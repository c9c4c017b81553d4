use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the selection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("matrix is asymmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },

    #[error("nonzero diagonal entry at node {0}")]
    SelfLoop(usize),

    #[error("entry at ({i}, {j}) is not binary: {value}")]
    NotBinary { i: usize, j: usize, value: f64 },

    #[error("node {0} is isolated; the normalized Laplacian is undefined")]
    IsolatedNode(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("leading eigenvector entry {index} has magnitude {value:e}; eigenvector ratios are degenerate")]
    DegenerateRatio { index: usize, value: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Eigen(_) | Error::DegenerateRatio { .. })
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
