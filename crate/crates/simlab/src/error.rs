use thiserror::Error;
use vdselect_core::VdError;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("sample is empty")]
    EmptySample,

    #[error("rank {rank} requested from {available} values")]
    RankOutOfRange { rank: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Core(#[from] VdError),
}
