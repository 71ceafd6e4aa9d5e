use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Core(#[from] hagv_core::Error),

    #[error("telemetry: {0}")]
    Telemetry(String),

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("at t = {t:.3} s: {source}")]
    Aborted { t: f64, source: hagv_core::Error },
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Telemetry(e.to_string())
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
