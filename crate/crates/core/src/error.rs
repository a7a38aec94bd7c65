use thiserror::Error;

#[derive(Debug, Error)]
pub enum GvdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty sphere family: {0}")]
    Infeasible(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GvdError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GvdError::InvalidInput(msg.into()))
}
