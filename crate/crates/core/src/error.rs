use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("enumeration of {requested} items exceeds the cap of {cap}")]
    EnumerationCap { requested: f64, cap: f64 },

    #[error("no code dimension k <= {max_k} satisfies the prime condition for n = {n}, p = {p}")]
    NoFeasibleDimension { n: usize, p: u64, max_k: usize },

    #[error("value {0} is outside the representable integer range")]
    OutOfRange(f64),

    #[error("flatness bound forms disagree: direct {direct}, dual {dual}")]
    ThetaDisagreement { direct: f64, dual: f64 },

    #[error("flatness factor {0} >= 1 makes the bound vacuous")]
    VacuousFlatness(f64),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
