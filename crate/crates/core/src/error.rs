use thiserror::Error;

/// Errors reported by the library. Each variant names the offending quantity
/// so that configuration front ends can point the user at the right key.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("operator has odd weight {weight}; overlap parity needs an even-weight operator")]
    OddWeightOperator { weight: usize },

    #[error("invalid code distance {0}: must be odd and at least 3")]
    InvalidDistance(usize),

    #[error("invalid value for `{name}`: {value} ({reason})")]
    InvalidParameter {
        name: String,
        value: String,
        reason: String,
    },

    #[error("per-step event probabilities sum to {total} > 1 for {context}")]
    ProbabilityOverflow { context: String, total: f64 },

    #[error("model {model} is not supported by {operation}")]
    UnsupportedModel { model: String, operation: String },

    #[error("no crossing of p_err with the baseline on [{x_min}, {x_max}]: {detail}")]
    Unbracketed { x_min: f64, x_max: f64, detail: String },

    #[error("relaxation parameter r = {0} >= 1: relaxation is not fast compared with the time step; use the long-lived excitation model")]
    SlowRelaxation(f64),
}

impl Error {
    pub(crate) fn param(name: &str, value: impl ToString, reason: &str) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
