use operators::OpError;
use pom::PomError;
use state_est::EstError;
use thiserror::Error;

use crate::separable::SeparableResult;

#[derive(Debug, Error)]
pub enum EntError {
    #[error("data provider failed: {0}")]
    Provider(String),
    #[error("separable search did not converge after {} iterations (residual {})", .0.iterations, .0.residual)]
    MaxIterExceeded(Box<SeparableResult>),
    #[error("invalid setting: {0}")]
    InvalidSetting(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Estimation(#[from] EstError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Pom(#[from] PomError),
}
