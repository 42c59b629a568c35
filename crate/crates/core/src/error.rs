use thiserror::Error;

/// Errors raised by the geometric operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected p = {expected}, found p = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid half-dimension p = {0}; p must be at least 1")]
    InvalidDimension(usize),

    #[error("non-finite component in {0}")]
    NonFinite(&'static str),

    #[error("degenerate metric: eigenvalue {eigenvalue:e} is below {threshold:e}")]
    DegenerateMetric { eigenvalue: f64, threshold: f64 },

    #[error("metric matrix is singular")]
    SingularMetric,

    /// The requested parameter lies outside the double-precision envelope of the
    /// closed-form evaluator (|alpha * t| too large for the hyperbolic terms).
    #[error("range exceeded: |alpha * t| = {alpha_t:e} at t = {t}")]
    RangeExceeded { alpha_t: f64, t: f64 },

    #[error("non-finite integrator state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
