use std::path::PathBuf;

use thiserror::Error;

/// CLI-level errors. Validation problems (bad config, malformed files,
/// invalid arguments) exit with code 2; runtime/numerics failures with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Validation { path: PathBuf, message: String },

    #[error("{0}")]
    InvalidArguments(String),

    #[error("ingestion failed for {} file(s):\n{}", .0.len(), .0.join("\n"))]
    IngestFailures(Vec<String>),

    #[error("{0}")]
    Runtime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] pulseband_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::Validation { .. }
            | CliError::InvalidArguments(_)
            | CliError::IngestFailures(_) => 2,
            CliError::Io(_) | CliError::Runtime(_) => 3,
            CliError::Core(e) => match e {
                pulseband_core::Error::InvalidInput(_)
                | pulseband_core::Error::InvalidBand { .. }
                | pulseband_core::Error::NyquistViolation { .. }
                | pulseband_core::Error::EmptyInput(_)
                | pulseband_core::Error::InvalidFrequency(_) => 2,
                _ => 3,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
