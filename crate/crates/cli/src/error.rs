use spinguide_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("scenario error: {0}")]
    Scenario(CoreError),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{failed} of {total} sweep points failed")]
    PartialSweep { failed: usize, total: usize },
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Scenario(e)
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Scenario(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::PartialSweep { .. } => 4,
        }
    }
}
