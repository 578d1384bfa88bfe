use thiserror::Error;

use crate::hysteresis::Variant;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("non-finite value at sample {index}: {reason}")]
    Numeric { index: usize, reason: String },

    #[error("input {value} at sample {index} outside [0, {max}]")]
    Domain { index: usize, value: f64, max: f64 },

    #[error("operation requires the asymmetric rate-independent variant, got {0:?}")]
    UnsupportedVariant(Variant),

    #[error("transfer function has a pole at the origin; static gain undefined")]
    PoleAtOrigin,

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("degenerate range: {0}")]
    DegenerateRange(&'static str),

    #[error("signals are not aligned: {0}")]
    Alignment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("malformed data at line {line}: {reason}")]
    Format { line: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
