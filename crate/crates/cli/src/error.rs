use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("infeasible regime: {0}")]
    Infeasible(String),

    #[error("tolerance breach: {0}")]
    Tolerance(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Infeasible(_) => 2,
            CliError::Tolerance(_) => 3,
        }
    }
}

impl From<cv_purify::Error> for CliError {
    fn from(err: cv_purify::Error) -> Self {
        match err {
            cv_purify::Error::InvalidParameter { .. } => CliError::Usage(err.to_string()),
            other => CliError::Infeasible(other.to_string()),
        }
    }
}
