use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar argument lies outside the domain of the requested formula.
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid Fock dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("generator is not anti-Hermitian (defect {defect:.3e})")]
    NotAntiHermitian { defect: f64 },

    /// Power iteration hit its iteration cap; the last Rayleigh quotient and iterate are kept.
    #[error("power iteration did not converge after {iterations} iterations (last value {last_value})")]
    NoConvergence {
        iterations: usize,
        last_value: f64,
        last_vector: Box<DVector<Complex64>>,
    },

    /// Too much population reached the edge of the truncated Fock space.
    #[error("truncation deficit {deficit:.3e} exceeds threshold {threshold:.3e}")]
    Truncation { deficit: f64, threshold: f64 },

    #[error("Gaussian integral diverges: {0}")]
    DivergentIntegral(&'static str),

    #[error("series diverges: {0}")]
    DivergentSeries(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}
