use thiserror::Error;

/// Errors raised by the core math, models and configuration loader.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not antisymmetric (max |m + mᵀ| = {residual:e})")]
    NotAntisymmetric { residual: f64 },

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("vehicle weight {weight:.3} N exceeds total available thrust {max_thrust:.3} N")]
    InfeasibleHover { weight: f64, max_thrust: f64 },

    #[error("singular ground-contact system (pivot {pivot:e}) at state {state}")]
    SingularSystem { pivot: f64, state: String },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
