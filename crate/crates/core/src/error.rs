use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("overlapping spans: [{0}, {1}) and [{2}, {3})")]
    OverlappingSpans(usize, usize, usize, usize),

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("instance too large for enumeration: {0} sequences")]
    TooLarge(f64),

    #[error("no cached activations; run a training-mode forward pass first")]
    MissingCache,

    #[error("table {0:?} is not fine-tuned")]
    FrozenTable(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
