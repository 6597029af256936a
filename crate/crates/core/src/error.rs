use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("integrand returned a non-finite value at ({u}, {v})")]
    NonFinite { u: f64, v: f64 },

    #[error(
        "quadrature accuracy not reached after {cells} cells: \
         error estimate {error:e} exceeds tolerance {tolerance:e}"
    )]
    AccuracyNotReached {
        cells: usize,
        error: f64,
        tolerance: f64,
        /// Best available estimate of the integral (component-wise).
        partial: Vec<f64>,
    },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("information matrix is singular or ill-conditioned ({0})")]
    SingularInformation(String),

    #[error("receiver grid is empty: side {side} m is shorter than the wavelength {wavelength} m")]
    EmptyGrid { side: f64, wavelength: f64 },

    #[error("optimizer did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
