//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A hyperparameter or input failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A forward-time argument fell outside `[0, T]`.
    #[error("time {t} outside [0, {t_max}]")]
    TimeOutOfRange { t: f64, t_max: f64 },

    /// A marginal covariance block is numerically singular.
    #[error("degenerate Gaussian marginal at t={t}: det(sigma)={det:e}")]
    DegenerateMarginal { t: f64, det: f64 },

    /// A covariance block is not positive semidefinite.
    #[error("matrix not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The sampler produced NaN or Inf; `step_index` names the composed step.
    #[error("non-finite {what} at step {step_index} (forward time {t})")]
    NonFinite {
        step_index: usize,
        t: f64,
        what: &'static str,
    },

    /// External or in-process score provider failed its contract.
    #[error("score provider: {0}")]
    Provider(String),

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("invalid scheme configuration: {0}")]
    Scheme(String),

    #[error("analysis: {0}")]
    Analysis(String),
}
