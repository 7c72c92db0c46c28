use operators::OpError;
use pom::PomError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CvError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sampling grid too coarse: mode orthonormality defect {0:e}")]
    GridTooCoarse(f64),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Pom(#[from] PomError),
}
