use cv::CvError;
use entanglement::EntError;
use pom::PomError;
use process_est::ProcError;
use sim::SimError;
use state_est::EstError;
use thiserror::Error;

/// Exit code 2 for anything wrong with the inputs, 1 for runs that fail.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("estimator failure: {0}")]
    Estimator(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Estimator(_) | CliError::Output(_) => 1,
        }
    }
}

impl From<EstError> for CliError {
    fn from(e: EstError) -> Self {
        match e {
            EstError::InvalidConfig(_) | EstError::InvalidData(_) | EstError::OutcomeMismatch(..) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Estimator(other.to_string()),
        }
    }
}

impl From<ProcError> for CliError {
    fn from(e: ProcError) -> Self {
        match e {
            ProcError::InvalidConfig(_) | ProcError::InvalidData(_) | ProcError::Dimension(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Estimator(other.to_string()),
        }
    }
}

impl From<EntError> for CliError {
    fn from(e: EntError) -> Self {
        match e {
            EntError::InvalidConfig(_) | EntError::InvalidSetting(_) | EntError::Provider(_) => {
                CliError::Config(e.to_string())
            }
            EntError::Estimation(inner) => inner.into(),
            other => CliError::Estimator(other.to_string()),
        }
    }
}

impl From<CvError> for CliError {
    fn from(e: CvError) -> Self {
        match e {
            CvError::Op(_) | CvError::Pom(_) => CliError::Estimator(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidSpec(_) | SimError::UnknownChannel(_) | SimError::InvalidProbabilities(_) => {
                CliError::Config(e.to_string())
            }
            SimError::Est(inner) => inner.into(),
            SimError::Proc(inner) => inner.into(),
            other => CliError::Estimator(other.to_string()),
        }
    }
}

impl From<PomError> for CliError {
    fn from(e: PomError) -> Self {
        CliError::Config(e.to_string())
    }
}
