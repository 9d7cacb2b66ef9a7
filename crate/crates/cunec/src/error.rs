//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by geometry, sampling, field generation and the
/// scenario pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A terminal position is outside every street corridor, or a link is
    /// geometrically degenerate.
    #[error("invalid position: {0}")]
    InvalidPosition(String),

    /// A distance argument is below the model reference distance.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A route references a street for which no parameter realization was
    /// sampled.
    #[error("unsampled parameter: {0}")]
    UnsampledParameter(String),

    /// Conditioning on a singular fixed block.
    #[error("conditioning failure: {0}")]
    ConditioningFailure(String),

    /// A matrix factorization failed even after diagonal jitter.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A row or column has zero spread, so scaling is undefined.
    #[error("degenerate field: {0}")]
    DegenerateField(String),

    /// A correlated group exceeds the covariance size cap.
    #[error(
        "resource limit: group has {links} links but the covariance cap allows {cap}; \
         split the scenario into smaller correlated groups or raise the cap"
    )]
    ResourceLimit { links: usize, cap: usize },

    /// Too few samples for an estimator.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A least-squares system is rank deficient.
    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    /// Configuration file parsing or validation failed.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
