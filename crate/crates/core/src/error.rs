use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("incompatible sample spaces: {0}")]
    SpaceMismatch(String),
    #[error("invalid sample space: {0}")]
    InvalidSpace(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("partition does not cover the sample space: {0}")]
    PartitionCoverage(String),
    #[error("invalid statistic: {0}")]
    InvalidStatistic(String),
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },
    #[error("parameter point outside the model domain: {0}")]
    OutsideDomain(String),
    #[error("non-positive density {value} at atom {atom}")]
    NonPositiveDensity { atom: usize, value: f64 },
    #[error("fiber over target atom {0} has zero mass")]
    ZeroMassFiber(usize),
    #[error("invalid congruent embedding: {0}")]
    InvalidEmbedding(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
