//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by modeling, fitting and parsing routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A value fell outside the model's valid domain.
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// The data cannot determine a solution (too few samples, degenerate inputs).
    #[error("ill-posed: {0}")]
    IllPosed(String),
    /// Malformed input text; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
