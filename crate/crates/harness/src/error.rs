use thiserror::Error;

/// Errors surfaced by the command line driver.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] radionet::Error),
    /// A spec, config or constants file is malformed or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Process exit code: 3 for validation and configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(radionet::Error::Internal(_)) => 1,
            HarnessError::Core(_) | HarnessError::Config(_) | HarnessError::Json(_) => 3,
            HarnessError::Csv(_) | HarnessError::Io(_) => 1,
        }
    }
}

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(msg.into()))
}
