use thiserror::Error;

/// Errors raised by the solver stack. Each variant names the stage that
/// failed so callers can surface provenance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch for `{what}`: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("kernel is singular at t = s = {at}; use integrated increments")]
    Singularity { at: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: relative change {change:e}")]
    QuadratureNonConvergence { a: f64, b: f64, change: f64 },

    #[error("operator D at step i = {step} is singular (pivot {pivot:e})")]
    SingularOperator { step: usize, pivot: f64 },

    #[error("matrix factorization failed: {0}")]
    Factorization(String),

    #[error("objective Hessian is not negative definite (non-admissible kernel?): {0}")]
    NotConcave(String),

    #[error("unsupported signal: {0}")]
    UnsupportedSignal(String),

    #[error("running inventory penalty phi = {phi} > 0 is not supported by the Nystrom scheme; use the LQ oracle")]
    RunningPenaltyUnsupported { phi: f64 },

    #[error("stochastic signal: pathwise QP would not be adapted; use Monte Carlo evaluation")]
    StochasticSignal,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
