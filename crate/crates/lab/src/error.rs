use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Core(hoelder_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<hoelder_core::Error> for LabError {
    fn from(e: hoelder_core::Error) -> Self {
        match e {
            hoelder_core::Error::Infeasible(m) => LabError::Infeasible(m),
            hoelder_core::Error::Parse { .. }
            | hoelder_core::Error::InvalidParameter { .. }
            | hoelder_core::Error::Io(_) => LabError::Config(e.to_string()),
            other => LabError::Core(other),
        }
    }
}

impl LabError {
    /// 1 for bad input, 2 for an infeasible schedule.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Infeasible(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
