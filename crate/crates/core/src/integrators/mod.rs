//! Time grid, splitting sub-steps, composed update schemes, and the sampling
//! loop.
//!
//! The sampler works in reverse time: with forward time `tau = T - t`, the
//! grid walks `tau` from `T` down to the cutoff `eps`, and each composed step
//! advances reverse time by the local grid spacing `h`. Score evaluations are
//! conditioned on forward time, matching how a pretrained network would be
//! called.

mod grid;
mod sampler;
mod scheme;
mod steps;

pub use grid::{Striding, StepContext, TimeGrid};
pub use sampler::{
    denoise_last_step, initial_state, sample, sample_with_noise, step_scheme, RunResult,
    SampleOptions,
};
pub use scheme::{Scheme, SchemeSpec};
pub use steps::{ou_coefficients, step_a, step_b, step_o, OuCoefficients};

pub(crate) use scheme::{composition, Cond, SubStep};
