use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, EdoError>;

#[derive(Debug, Error)]
pub enum EdoError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported TSPLIB feature: {0}")]
    Unsupported(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid 2-opt move ({i}, {j}) for a tour of {n} nodes")]
    InvalidMove { i: usize, j: usize, n: usize },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model too large: {0}")]
    Size(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl EdoError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        EdoError::Parse {
            line,
            message: message.into(),
        }
    }
}
