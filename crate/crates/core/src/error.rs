use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no unique geodesic: distance {distance} is not below the diameter bound {cap}")]
    NoUniqueGeodesic { distance: f64, cap: f64 },

    #[error("numeric domain violation: {0}")]
    NumericDomain(String),

    #[error("infeasible triangle: {0}")]
    InfeasibleTriangle(String),

    #[error("convexity violation: {0}")]
    ConvexityViolation(String),

    #[error("diameter {diameter} of the point set is not below the bound {limit}")]
    DiameterBound { diameter: f64, limit: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("point {0:?} is not covered by any cover member")]
    Uncovered(Vec<f64>),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("insufficient cover: {0}")]
    InsufficientCover(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
