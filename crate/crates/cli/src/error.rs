use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("diverged at t = {t} s (last good epoch t = {last_good} s): {reason}")]
    Diverged { t: f64, last_good: f64, reason: String },
}

impl CliError {
    /// Stable process exit code: 2 for bad input, 3 for numerical divergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Diverged { .. } => 3,
            _ => 2,
        }
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub type Result<T> = std::result::Result<T, CliError>;
