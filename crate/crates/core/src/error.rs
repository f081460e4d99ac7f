use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller violated a precondition (shape mismatch, out-of-range parameter).
    #[error("usage error: {0}")]
    Usage(String),

    /// Input data is inconsistent with the requested model (e.g. bad labels).
    #[error("data error: {0}")]
    Data(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::usage(format!(
            "{what}: dimension mismatch (expected {expected}, got {got})"
        )));
    }
    Ok(())
}
