use thiserror::Error;

/// Errors raised by the toolkit. The variants map onto the CLI exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("size limit exceeded: {what} has {size} points, cap is {cap}")]
    Size { what: String, size: u128, cap: u128 },

    #[error("numeric failure in {context}: achieved tolerance {achieved:e}")]
    Numeric { context: String, achieved: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(context: impl Into<String>, achieved: f64) -> Self {
        Error::Numeric { context: context.into(), achieved }
    }
}
