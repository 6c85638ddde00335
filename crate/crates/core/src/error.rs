use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot compose budgets of different kinds ({0} with {1}); convert explicitly first")]
    IncompatibleBudgets(&'static str, &'static str),

    #[error("parallel composition requires disjoint partitions")]
    DisjointnessViolation,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("stratum `{0}` is empty")]
    EmptyStratum(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("group `{0}` present in the sample but missing from the public holdout")]
    MissingGroupWeight(String),

    #[error("normalization undefined: truth entry {index} is zero")]
    UndefinedNormalization { index: usize },

    #[error("digamma domain error: x = {0} must be positive")]
    Domain(f64),

    #[error("noisy marginals of group `{0}` carry no mass; cannot sample")]
    DegenerateStratum(String),

    #[error("data error at {location}: {reason}")]
    Data { location: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn ensure_unit_open(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must lie in (0, 1), got {value}")))
    }
}
