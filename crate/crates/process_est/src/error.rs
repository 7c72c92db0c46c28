use operators::OpError;
use pom::PomError;
use thiserror::Error;

use crate::mlme::QptResult;

#[derive(Debug, Error)]
pub enum ProcError {
    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("not a Choi operator: {0}")]
    NotChoi(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("data provider failed: {0}")]
    Provider(String),
    #[error("no convergence after {} iterations (residual {:e})", .0.iterations, .0.residual)]
    MaxIterExceeded(Box<QptResult>),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Pom(#[from] PomError),
}

impl ProcError {
    /// The best iterate carried by a `MaxIterExceeded` error.
    pub fn best_iterate(&self) -> Option<&QptResult> {
        match self {
            ProcError::MaxIterExceeded(r) => Some(r),
            _ => None,
        }
    }
}
