//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate key in build input: {0}")]
    DuplicateKey(String),

    #[error("capacity exceeded: store is limited to {limit} resident entries")]
    CapacityExceeded { limit: usize },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid index config: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),

    #[error("invalid workload: {0}")]
    InvalidWorkload(String),

    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),

    #[error("bench failed: {0}")]
    Bench(String),

    #[error("environment misuse: {0}")]
    EnvUsage(String),

    #[error("reward inputs out of domain: {0}")]
    RewardDomain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparam(String),

    #[error("training fault: {0}")]
    TrainingFault(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("selection failed: {0}")]
    Selection(String),

    #[error("report failed: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
