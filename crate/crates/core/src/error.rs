use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("operation requires a non-empty population")]
    EmptyPopulation,

    #[error("population of size {size} is too small: need at least {required}")]
    PopulationTooSmall { size: usize, required: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("interval profile is undefined ({0})")]
    UndefinedProfile(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        LabError::Precondition(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        LabError::InvalidConfig(msg.into())
    }
}
