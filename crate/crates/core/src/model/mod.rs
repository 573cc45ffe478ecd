//! The phase-space Langevin diffusion model.
//!
//! Diffusion runs over joint position/momentum pairs `z = (x, m)`; every
//! matrix in the model is a 2x2 block acting on one dimension's pair, applied
//! independently per dimension. For diagonal-Gaussian data the forward
//! marginals stay Gaussian with per-dimension 2x2 covariance blocks, which
//! makes the score exact and integrator error measurable.

mod data;
mod mat2;
mod moments;
mod params;
mod provider;
mod score;
mod state;

pub use data::GaussianDataSpec;
pub use mat2::Mat2;
pub use moments::{
    forward_moments, perturbation_sample, stationary_covariance, GaussianMoments, CHOLESKY_JITTER,
};
pub use params::PsldParams;
pub use provider::{
    score_provider_call, CountingProvider, ExternalProvider, GaussianScoreOracle, RecordingProvider,
    ReplayProvider, RunContext, ScoreProvider, ZeroScoreProvider,
};
pub use score::{analytic_score, score_affine, score_affine_dt, AffineScore};
pub use state::{JointState, ScoreEval};
