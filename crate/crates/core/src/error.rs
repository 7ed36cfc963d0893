use thiserror::Error;

/// Errors raised by the numerical kernel and the simulation layers above it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |h - h†| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not symmetric (max |s - sᵀ| = {0:e})")]
    NotSymmetric(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("expected {expected} parameters, got {got}")]
    BadParameterCount { expected: usize, got: usize },

    #[error("bad weights: {0}")]
    BadWeights(String),

    #[error("transform is not an isometry (max |u†u - I| = {0:e})")]
    NotIsometry(f64),

    #[error("operator is not unitary (max |uu† - I| = {0:e})")]
    NonUnitary(f64),

    #[error("outcome probability {0:e} is below the normalization floor")]
    ZeroProbability(f64),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("non-finite value encountered")]
    NonFinite,

    /// A state failed validation; `invariant` names the violated condition.
    #[error("invalid state ({invariant}): {detail}")]
    InvalidState { invariant: &'static str, detail: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidState { invariant, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
