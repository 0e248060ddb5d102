use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    #[error("calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("no route from block {from} to block {to}")]
    NoRoute { from: String, to: String },

    #[error("packet separation cannot be satisfied: {0}")]
    SeparationUnsatisfiable(String),

    #[error("compiled schedule failed verification: fidelity {fidelity:.3e} below threshold ({what})")]
    VerificationFailed { what: String, fidelity: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
