use qfem_core::QfemError;
use thiserror::Error;

/// Failures mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown preset, unreadable config path.
    #[error("{0}")]
    Usage(String),
    /// The config or the computed artifacts failed a check.
    #[error("{0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<QfemError> for CliError {
    fn from(e: QfemError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => crate::EXIT_VALIDATION,
            _ => crate::EXIT_USAGE,
        }
    }
}
