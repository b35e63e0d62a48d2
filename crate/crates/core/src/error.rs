use thiserror::Error;

/// Errors produced by lattice construction, enumeration and cubature.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrolovError {
    #[error("dimension {0} is degenerate: Chebyshev lattices need d >= 2")]
    DegenerateDimension(usize),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("input basis is not orthogonal: Gram deviation {deviation:e} exceeds {tolerance:e}")]
    NonOrthogonal { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("integer overflow while building the reduction matrix for d = {0}")]
    Overflow(usize),

    #[error("{0}")]
    Domain(String),
}

impl FrolovError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FrolovError::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, FrolovError>;
