use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("problem too large for exhaustive enumeration: {pairs} pairs (limit {limit})")]
    Capacity { pairs: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate scaling at vertex pair ({u}, {v}): probability {p}")]
    DegenerateScaling { u: usize, v: usize, p: f64 },

    #[error("numerically degenerate: {0}")]
    NumericalDegeneracy(String),

    #[error("value {0} outside tabulated range")]
    Range(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
