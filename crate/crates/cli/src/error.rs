//! Command-line error type and the exit-code policy.

use std::path::PathBuf;

use prolate_core::error::ProlateError;
use thiserror::Error;

/// Exit codes: 0 success, 2 usage, 3 numeric or tolerance failure, 4 I/O.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ProlateError),
    #[error("{0}")]
    Tolerance(String),
    #[error("{}: {detail}", path.display())]
    Parse { path: PathBuf, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                ProlateError::Parameter(_)
                | ProlateError::Domain(_)
                | ProlateError::Config(_)
                | ProlateError::Validation(_)
                | ProlateError::Resolution(_)
                | ProlateError::Dimension(_)
                | ProlateError::Index(_) => 2,
                ProlateError::Numeric(_) | ProlateError::Rank(_) | ProlateError::Hypothesis(_) => {
                    3
                }
            },
            CliError::Tolerance(_) => 3,
            CliError::Parse { .. } | CliError::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
