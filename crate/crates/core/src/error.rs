//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or prior was given parameters outside its domain.
    #[error("parameter domain error in {what}: {msg}")]
    ParamDomain { what: &'static str, msg: String },

    /// Vector/matrix sizes do not line up.
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A non-finite value was found where a finite one is required.
    #[error("non-finite value at {name} (index {index})")]
    NonFinite { name: String, index: usize },

    /// A named parameter column does not exist.
    #[error("unknown parameter {0:?}")]
    UnknownParam(String),

    /// Invalid input that is not a parameter-domain problem (empty data,
    /// constant input where spread is required, bad labels, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Every warmup transition diverged; the sampler cannot adapt.
    #[error("all warmup transitions diverged for {target} (step size {step_size}); \
             the posterior geometry defeats the integrator")]
    AllDivergent { target: String, step_size: f64 },

    /// Text formats (CSV, JSON lines, plot data) that failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// True for failures of the computation itself (as opposed to bad input).
    pub fn is_computational(&self) -> bool {
        matches!(self, Error::AllDivergent { .. } | Error::NonFinite { .. })
    }
}
