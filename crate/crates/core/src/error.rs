use std::io;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value was NaN/inf or otherwise outside the domain of an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix or batch dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A parameter (generator spec, count, probability, ...) is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A binary file does not follow its declared layout.
    #[error("format error: {0}")]
    Format(String),

    /// Two inputs that must agree (image/label counts, dataset dims) do not.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// A metric was requested over an empty set.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}
