use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the modelling pipeline.
#[derive(Debug, Error)]
pub enum AnfisError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("degenerate firing strengths: {0}")]
    DegenerateFiring(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("insufficient data: need at least {needed} rows, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("split error: {0}")]
    Split(String),

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AnfisError {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        AnfisError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, AnfisError>;
