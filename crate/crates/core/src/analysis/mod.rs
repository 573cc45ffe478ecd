//! Quantitative verification of the samplers against the exact oracle.
//!
//! Error is measured distributionally: the closed-form 2-Wasserstein distance
//! between the empirical terminal Gaussian moments and the exact marginal
//! plays the role a feature-space metric would at full scale. One-step
//! truncation probes compare measured means against second-order Ito-Taylor
//! expansions, and a grid search tunes the position-space noise level.

mod curve;
mod empirical;
mod expansion;
mod fit;
mod sweep;
mod truncation;
mod w2;

pub use curve::{
    mean_propagation_errors, terminal_error, terminal_moments, w2_sampling_floor,
    weak_error_curve, CurvePoint, ErrorCurve,
};
pub use empirical::empirical_moments;
pub use fit::log_log_slope;
pub use sweep::{lambda_sweep, LambdaSweep};
pub use truncation::{score_reuse_gap, truncation_residual, ProbeScore, ScoreReuseGap, TruncationReport};
pub use w2::{gaussian_w2, mat2_sqrt_psd, Metric};
