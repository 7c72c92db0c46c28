use operators::OpError;
use pom::PomError;
use thiserror::Error;

use crate::EstimationResult;

#[derive(Debug, Error)]
pub enum EstError {
    #[error("outcome {index} has counts but zero probability")]
    ZeroProbabilityWithCounts { index: usize },
    #[error("no convergence after {} iterations (residual {:e})", .0.iterations, .0.residual)]
    MaxIterExceeded(Box<EstimationResult>),
    #[error("POM is not informationally complete (rank {rank}, need {needed})")]
    NotInformationallyComplete { rank: usize, needed: usize },
    #[error("no state reproduces the frequencies (dual objective {certificate:e} < 0)")]
    Infeasible { certificate: f64 },
    #[error("{0} outcomes in the data but {1} in the POM")]
    OutcomeMismatch(usize, usize),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Pom(PomError),
}

impl From<PomError> for EstError {
    fn from(e: PomError) -> Self {
        match e {
            PomError::NotInformationallyComplete { rank, needed } => EstError::NotInformationallyComplete { rank, needed },
            other => EstError::Pom(other),
        }
    }
}

impl EstError {
    /// The best iterate carried by a `MaxIterExceeded` error.
    pub fn best_iterate(&self) -> Option<&EstimationResult> {
        match self {
            EstError::MaxIterExceeded(r) => Some(r),
            _ => None,
        }
    }
}
