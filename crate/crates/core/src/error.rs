//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix dimension does not match what the operation requires.
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numeric value that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Underlying I/O failure (trajectory store, transports).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A wire message could not be decoded or carried inconsistent fields.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// A worker failed to produce a usable result for a generation.
    #[error("worker failure: {0}")]
    Worker(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(what: &'static str, expected: usize, got: usize) -> Self {
        Error::ShapeMismatch {
            what,
            expected,
            got,
        }
    }
}
