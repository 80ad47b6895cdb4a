use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero too close to contour after {attempts} perturbations")]
    ContourTooClose { attempts: u32 },
    #[error("contour quadrature did not converge: {0}")]
    QuadratureNotConverged(String),
    #[error("Newton refinement did not converge near {near}")]
    NonConvergent { near: String },
    #[error("Gram pivots remain indeterminate at {bits} bits")]
    PrecisionExhausted { bits: u32 },
    #[error("kernel matrix of order {n} is singular at pivot {pivot}")]
    NSingular { n: usize, pivot: usize },
    #[error("ordinates {0} and {1} are closer than the duplicate guard")]
    DuplicateOrdinates(String, String),
    #[error("polynomial vanishes on the evaluation line at {0}")]
    ZeroOnEvaluationLine(String),
    #[error("cache format: {0}")]
    CacheFormat(String),
}

impl Error {
    /// Failures of the numerics, as opposed to malformed input.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::ContourTooClose { .. }
                | Error::QuadratureNotConverged(_)
                | Error::NonConvergent { .. }
                | Error::PrecisionExhausted { .. }
                | Error::NSingular { .. }
                | Error::ZeroOnEvaluationLine(_)
        )
    }
}
