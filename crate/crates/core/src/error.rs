//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A size cap was exceeded (replica count, Hilbert-space dimension, ...).
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// Mismatched or invalid dimensions.
    #[error("shape error: {0}")]
    Shape(String),

    /// An input violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The request is outside what the engine supports.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A textual value could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
