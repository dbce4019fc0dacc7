use num_complex::Complex64;
use thiserror::Error;

/// Failure modes of the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecayError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Newton iteration (including grid restarts) did not converge.
    #[error("pole n={n} did not converge (last iterate {last})")]
    Convergence { n: usize, last: Complex64 },

    /// A converged root violates the fourth-quadrant constraint.
    #[error("pole n={n} at {k} lies outside the region Re k > |Im k|, Im k < 0")]
    Constraint { n: usize, k: Complex64 },

    /// The integrand was evaluated on, or a contour passes too close to, a zero of D(k).
    #[error("too close to a resonance pole at k = {k} (distance {distance:.3e})")]
    PoleProximity { k: Complex64, distance: f64 },

    /// A quadrature or cross-check failed to reach the requested accuracy.
    #[error("accuracy target missed: {what} (estimate {estimate:.3e}, tolerance {tolerance:.3e})")]
    Accuracy {
        what: String,
        estimate: f64,
        tolerance: f64,
    },

    /// A searched-for quantity does not exist in the scanned range.
    #[error("not found: {0}")]
    NotFound(String),
}

impl DecayError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        DecayError::Domain(msg.into())
    }

    /// True for errors caused by invalid input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(self, DecayError::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, DecayError>;
