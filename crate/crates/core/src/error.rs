use thiserror::Error;

/// Errors raised by the verification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CknError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("quadrature did not reach rel_tol {rel_tol:e} on [{lo:e}, {hi:e}] (estimate {estimate:e})")]
    AccuracyNotReached {
        lo: f64,
        hi: f64,
        rel_tol: f64,
        estimate: f64,
    },

    #[error("integrand is not finite at r = {r:e}")]
    NonFiniteIntegrand { r: f64 },

    #[error("integrand not integrable: {0}")]
    Integrability(String),

    #[error("undefined denominator in z-vector: (2-p)|s| + (p-1)|x| = 0")]
    UndefinedDenominator,

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("every corpus pair was excluded ({excluded} below numerical resolution)")]
    AllExcluded { excluded: usize },

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, CknError>;

impl From<std::io::Error> for CknError {
    fn from(e: std::io::Error) -> Self {
        CknError::Io(e.to_string())
    }
}
