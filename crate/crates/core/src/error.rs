use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StefanError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {tol:e} on [{lo}, {hi}] (estimate {estimate:e})")]
    Quadrature { lo: f64, hi: f64, tol: f64, estimate: f64 },

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last delta {last_delta:e}, measured ratio {epsilon_estimate})"
    )]
    NonConvergence {
        iterations: usize,
        last_delta: f64,
        epsilon_estimate: f64,
    },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("monotonicity check failed: {0}")]
    NotMonotone(String),
}

impl StefanError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        StefanError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        !matches!(self, StefanError::InvalidParameter { .. } | StefanError::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, StefanError>;
