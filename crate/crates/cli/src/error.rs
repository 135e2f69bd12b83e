use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Engine(#[from] fockbell::Error),

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv encoding failed: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Engine(_) => "precondition",
            Self::Write { .. } => "io",
            Self::Csv(_) => "io",
        }
    }

    /// One-line JSON record describing the failure.
    pub fn record(&self, command: Option<&str>) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "command": command,
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}
