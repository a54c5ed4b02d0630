use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("Gauss-Hermite order {0} outside the supported range 1..=200")]
    OrderOutOfRange(usize),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {estimate:e}, error estimate {error:e})"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("energy balance evaluated to non-finite value {value} at u = {u} m/s")]
    NonFiniteBalance { u: f64, value: f64 },

    #[error("bisection did not reach the rate tolerance within {iterations} iterations (u = {u} m/s, residual {residual:e})")]
    RootNotConverged {
        u: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("invalid sweep axis `{axis}`: {reason}")]
    InvalidAxis { axis: String, reason: String },

    #[error("no contour found at level {level}")]
    ContourNotFound { level: f64 },

    #[error("contour at level {level} is too fragmented for a line fit")]
    ContourTooFragmented { level: f64 },

    #[error("worker pool: {0}")]
    WorkerPool(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
