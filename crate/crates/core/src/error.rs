use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: corrupt model file at byte {offset}: {message}")]
    CorruptModel {
        path: PathBuf,
        offset: usize,
        message: String,
    },
    #[error("unsupported model version {found:?} (expected {expected:?})")]
    ModelVersion { found: String, expected: String },
    #[error("duplicate id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("unknown role {0:?}")]
    UnknownRole(String),
    #[error("empty text")]
    EmptyText,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },
    #[error("singular system; use lambda > 0 for collinear features")]
    Singular,
    #[error("missing companion text for document {0:?}")]
    MissingCompanion(String),
    #[error("document {0:?} not found")]
    MissingDocument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
