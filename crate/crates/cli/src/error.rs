use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("config value out of range: {0}")]
    Range(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] idflow_core::Error),
}

impl CliError {
    /// Whether the error stems from user input rather than from the run.
    pub fn is_usage(&self) -> bool {
        matches!(self, CliError::Schema { .. } | CliError::Range(_))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
