use thiserror::Error;

/// Errors produced by the solver and the verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("non-finite values in input field")]
    NonFinite,

    #[error("kernel is singular at t = {t} (|sin(2 gamma t)| = {sin_abs:e})")]
    SingularTime { t: f64, sin_abs: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gradient flow did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("gradient flow collapsed at iteration {iteration} (sup norm {sup_norm:e}); mass is likely supercritical")]
    FlowCollapse { iteration: usize, sup_norm: f64 },

    #[error("shooting bracket failure: {0}")]
    BracketFailure(String),

    #[error("insufficient records: need at least {needed}, got {got}")]
    InsufficientRecords { needed: usize, got: usize },

    #[error("grad_norm_sq is not monotone in the fit window (first decrease at t = {t})")]
    NonMonotone { t: f64 },

    #[error("input field is not radial (asymmetry {asymmetry:e})")]
    NonRadial { asymmetry: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
