use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was handed parameters outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested weight has no admissible derivative weight.
    #[error("weight has no admissible derivative: {0}")]
    NoDerivativeWeight(String),

    /// Grid or basis shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The time integrator produced a non-finite field.
    #[error("solution blew up at t = {t}: {detail}")]
    Blowup { t: f64, detail: String },

    /// A decay-theory precondition failed, so the run is refused.
    #[error("decay hypotheses violated: {0}")]
    GateRefused(String),

    /// Configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
