use hcj_core::HcjError;
use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status when a reproduction claim fails.
pub const EXIT_CLAIM_FAILED: i32 = 1;
/// Exit status for malformed input, bad flags and unreadable files.
pub const EXIT_INPUT: i32 = 2;
/// Exit status when a size or resource limit is hit.
pub const EXIT_RESOURCE: i32 = 3;
/// Exit status for numerical failures inside a solver.
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] HcjError),

    #[error("{failed} of {total} claims failed")]
    ClaimsFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Read { .. } => EXIT_INPUT,
            CliError::Write(_) => EXIT_RESOURCE,
            CliError::ClaimsFailed { .. } => EXIT_CLAIM_FAILED,
            CliError::Core(e) if e.is_input_error() => EXIT_INPUT,
            CliError::Core(HcjError::Resource(_)) => EXIT_RESOURCE,
            CliError::Core(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Write(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Write(std::io::Error::other(e))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
