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

    /// Malformed input; `line` is 1-based.
    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    /// Well-formed input that breaks a data invariant.
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown document id {0:?}")]
    UnknownDocument(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Bad wiki link markup; `offset` is a byte offset into the passage.
    #[error("link markup at byte {offset}: {message}")]
    Markup { offset: usize, message: String },

    #[error("index snapshot: {0}")]
    Snapshot(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }

    /// True for I/O failures caused by a missing file.
    pub fn is_missing_input(&self) -> bool {
        matches!(self, Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }

    /// True when the input was readable but rejected as malformed or inconsistent.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::DimensionMismatch { .. }
                | Error::UnknownDocument(_)
                | Error::InvalidParameter(_)
                | Error::Markup { .. }
                | Error::Snapshot(_)
        )
    }
}
