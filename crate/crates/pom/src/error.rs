use operators::OpError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PomError {
    #[error("POM has no outcomes")]
    Empty,
    #[error("outcome {index} is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },
    #[error("outcomes sum to more than the identity (max eigenvalue {max_eigenvalue})")]
    NotBounded { max_eigenvalue: f64 },
    #[error("outcomes do not sum to the identity")]
    Incomplete,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("POM is not informationally complete (rank {rank} of {needed})")]
    NotInformationallyComplete { rank: usize, needed: usize },
    #[error("POM does not satisfy the SIC Gram relation (max deviation {deviation:e})")]
    NotSic { deviation: f64 },
    #[error("unsupported POM: {0}")]
    Unsupported(String),
    #[error("random POM construction kept producing a rank-deficient sum")]
    RankDeficientChi,
    #[error("invalid efficiency matrix: {0}")]
    InvalidEfficiency(String),
    #[error(transparent)]
    Op(#[from] OpError),
}
