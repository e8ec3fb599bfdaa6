use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("improper transfer function: numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },

    #[error("feedback return difference 1 + a*b is identically zero")]
    SingularFeedback,

    #[error("fit error {error:.4} exceeds ceiling {ceiling:.4} over the central band")]
    FitCeilingExceeded { error: f64, ceiling: f64 },

    #[error("fitted denominator has a root with nonnegative real part ({re:e})")]
    UnstableFit { re: f64 },

    #[error("algebraic loop in interconnection is singular")]
    SingularAlgebraicLoop,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
