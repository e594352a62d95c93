use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or configuration (exit 2).
    #[error("{0}")]
    Config(String),

    /// Unreadable inputs or unwritable outputs (exit 3).
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

impl From<race_core::Error> for CliError {
    fn from(err: race_core::Error) -> Self {
        match err {
            race_core::Error::Io { path, source } => CliError::io(path, source),
            other => CliError::Config(other.to_string()),
        }
    }
}
