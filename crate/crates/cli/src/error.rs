use std::path::PathBuf;

use thiserror::Error;
use vdselect_core::VdError;
use vdselect_simlab::SimError;

use crate::matrix::MatrixError;

/// Failures surfaced by the command-line front end. Each maps to a stable
/// process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Matrix(#[from] MatrixError),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("explicit dummy block needs about {estimate} bytes, above the budget of {budget} bytes")]
    MemoryBudgetExceeded { estimate: u64, budget: u64 },
}

impl CliError {
    /// 2 usage, 3 file format or I/O, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::MemoryBudgetExceeded { .. } => 2,
            CliError::Matrix(_) | CliError::Format { .. } | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<VdError> for CliError {
    fn from(e: VdError) -> Self {
        match e {
            VdError::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParameter(msg) => CliError::Usage(msg),
            SimError::Core(inner) => inner.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
