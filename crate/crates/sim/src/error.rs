use operators::OpError;
use pom::PomError;
use process_est::ProcError;
use state_est::EstError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("unknown channel id {0:?}")]
    UnknownChannel(String),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Pom(#[from] PomError),
    #[error(transparent)]
    Est(#[from] EstError),
    #[error(transparent)]
    Proc(#[from] ProcError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
