use std::path::PathBuf;

use anfis_core::AnfisError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: `{key}`: {message}")]
    Config {
        path: PathBuf,
        key: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] AnfisError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Format { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                AnfisError::Config { .. } => 1,
                AnfisError::Numeric(_) | AnfisError::DegenerateFiring(_) => 3,
                _ => 2,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "usage",
            3 => "numeric",
            _ => "data",
        }
    }

    /// Offending configuration key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::Config { key, .. } => Some(key),
            CliError::Core(AnfisError::Config { key, .. }) => Some(key),
            _ => None,
        }
    }

    /// Single-line JSON rendering for stderr.
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("error".into(), self.kind().into());
        obj.insert("code".into(), self.exit_code().into());
        if let Some(key) = self.key() {
            obj.insert("key".into(), key.into());
        }
        obj.insert("message".into(), single_line(&self.to_string()).into());
        serde_json::Value::Object(obj).to_string()
    }
}

pub(crate) fn single_line(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, CliError>;
