use thiserror::Error;

/// Errors raised by the constructions, estimators and oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} is {requested}, cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: String,
        cap: String,
    },

    #[error("index {index} lies beyond the evaluable horizon {horizon}")]
    HorizonExceeded { index: String, horizon: String },

    #[error("parity violation: a_{position} = {exponent} does not share the parity of {position}")]
    ParityViolation { position: usize, exponent: u32 },

    #[error("invalid gap sequence: {0}")]
    InvalidGaps(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("bad descriptor: {0}")]
    Descriptor(String),

    #[error("tuple lies on the diagonal: descriptor `{0}` appears twice")]
    Diagonal(String),

    #[error("invalid delta: {0}")]
    InvalidDelta(String),

    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn capacity(what: &'static str, requested: impl ToString, cap: impl ToString) -> Self {
        Error::Capacity {
            what,
            requested: requested.to_string(),
            cap: cap.to_string(),
        }
    }

    pub(crate) fn horizon(index: impl ToString, horizon: impl ToString) -> Self {
        Error::HorizonExceeded {
            index: index.to_string(),
            horizon: horizon.to_string(),
        }
    }
}
