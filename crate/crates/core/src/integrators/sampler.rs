use super::scheme::{composition, Cond, SubStep};
use super::steps::{step_a, step_b, step_em, step_o};
use super::{SchemeSpec, StepContext, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{score_provider_call, JointState, PsldParams, RunContext, ScoreEval, ScoreProvider};
use crate::rng::{CounterNoise, NoiseSource, Stream};

#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Keep a copy of the state after every composed step.
    pub trace: bool,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Final state, at the cutoff (or at time zero after denoising).
    pub state: JointState,
    /// Total score evaluations, including the denoising one.
    pub total_nfe: u64,
    pub trace: Option<Vec<JointState>>,
}

/// Chains drawn from the stationary distribution `N(0, diag(1, M))` per
/// dimension, at forward time `T`.
pub fn initial_state(p: &PsldParams, n_chains: usize, noise: &dyn NoiseSource) -> JointState {
    let sqrt_mass = p.mass().sqrt();
    let mut state = JointState::zeros(n_chains, p.dim, p.t_max);
    let dim = p.dim;
    let (x, m) = state.xm_mut();
    for chain in 0..n_chains {
        for d in 0..dim {
            let (ex, em) =
                noise.normal_pair(Stream::StationaryInit, 0, chain as u64, d as u64);
            let idx = chain * dim + d;
            x[idx] = ex;
            m[idx] = sqrt_mass * em;
        }
    }
    state
}

/// Applies one composed update step of the configured scheme in place.
///
/// The state's forward time moves from `tau0 = T - t` to `tau0 - h`; every
/// score evaluation increments the run context by one.
pub fn step_scheme(
    p: &PsldParams,
    spec: &SchemeSpec,
    provider: &mut dyn ScoreProvider,
    ctx_run: &mut RunContext,
    state: &mut JointState,
    ctx: &StepContext,
    step_index: u64,
    noise: &dyn NoiseSource,
) -> Result<()> {
    spec.validate()?;
    if !(ctx.h > 0.0) {
        return Err(Error::Grid(format!("step size must be > 0, got {}", ctx.h)));
    }
    let tau0 = state.t;
    let tau1 = tau0 - ctx.h;

    let mut evals: Vec<ScoreEval> = Vec::with_capacity(3);
    for sub in composition(spec.scheme) {
        match *sub {
            SubStep::Ou => step_o(p, state, ctx, spec.lambda_s, noise, step_index),
            SubStep::Eval { cond } => {
                let t_cond = match cond {
                    Cond::StepStart => tau0,
                    Cond::StepEnd => tau1,
                };
                evals.push(score_provider_call(ctx_run, provider, state, t_cond)?);
            }
            SubStep::B { frac, eval } => step_b(p, state, &evals[eval], frac * ctx.h)?,
            SubStep::A { eval } => step_a(p, state, &evals[eval], ctx.h)?,
            SubStep::EulerMaruyama { eval } => {
                step_em(p, state, &evals[eval], ctx, noise, step_index)?
            }
        }
    }
    state.t = tau1;
    Ok(())
}

/// Final Euler update from the cutoff to time zero, conditioned at the
/// cutoff; costs one score evaluation.
pub fn denoise_last_step(
    p: &PsldParams,
    provider: &mut dyn ScoreProvider,
    ctx_run: &mut RunContext,
    state: &mut JointState,
) -> Result<()> {
    let eps = p.eps_cutoff;
    if (state.t - eps).abs() > 1e-12 * eps.max(1.0) {
        return Err(Error::Scheme(format!(
            "denoising requires the state at the cutoff {eps}, got t={}",
            state.t
        )));
    }
    let se = score_provider_call(ctx_run, provider, state, eps)?;
    let hb2 = p.beta * eps / 2.0;
    let two_gamma = 2.0 * p.gamma_cap;
    let two_m_nu = 2.0 * p.mass() * p.nu;
    let dim = state.dim();
    let n = state.n_chains();
    let (x, m) = state.xm_mut();
    for chain in 0..n {
        for d in 0..dim {
            let idx = chain * dim + d;
            let (x0, m0) = (x[idx], m[idx]);
            x[idx] = x0 + hb2 * (p.gamma_cap * x0 - p.m_inv * m0 + two_gamma * se.sx[idx]);
            m[idx] = m0 + hb2 * (x0 + p.nu * m0 + two_m_nu * se.sm[idx]);
        }
    }
    state.t = 0.0;
    Ok(())
}

fn check_finite_at(state: &JointState, step_index: usize) -> Result<()> {
    if state.x().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            step_index,
            t: state.t,
            what: "position",
        });
    }
    if state.m().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            step_index,
            t: state.t,
            what: "momentum",
        });
    }
    Ok(())
}

/// Runs the full sampling loop with the default counter noise for `seed`.
pub fn sample(
    p: &PsldParams,
    spec: &SchemeSpec,
    provider: &mut dyn ScoreProvider,
    grid: &TimeGrid,
    n_chains: usize,
    seed: u64,
    options: SampleOptions,
) -> Result<RunResult> {
    sample_with_noise(p, spec, provider, grid, n_chains, &CounterNoise::new(seed), options)
}

/// Sampling loop with an explicit noise source.
///
/// Initializes chains from the stationary distribution, iterates the scheme
/// over consecutive grid times, optionally applies the final denoising
/// update, and aborts with the step index on any non-finite value.
pub fn sample_with_noise(
    p: &PsldParams,
    spec: &SchemeSpec,
    provider: &mut dyn ScoreProvider,
    grid: &TimeGrid,
    n_chains: usize,
    noise: &dyn NoiseSource,
    options: SampleOptions,
) -> Result<RunResult> {
    p.validated()?;
    spec.validate()?;
    if grid.times()[0] > p.t_max + 1e-12 {
        return Err(Error::Grid(format!(
            "grid starts at {} beyond the horizon {}",
            grid.times()[0],
            p.t_max
        )));
    }

    let mut state = initial_state(p, n_chains, noise);
    state.t = grid.times()[0];
    let mut ctx_run = RunContext::new();
    let mut trace = options.trace.then(Vec::new);

    for k in 0..grid.n_steps() {
        let ctx = grid.step_context(k);
        step_scheme(p, spec, provider, &mut ctx_run, &mut state, &ctx, k as u64, noise)?;
        // Pin to the grid value; repeated subtraction would drift.
        state.t = grid.times()[k + 1];
        check_finite_at(&state, k)?;
        if let Some(tr) = trace.as_mut() {
            tr.push(state.clone());
        }
    }

    if spec.denoise_last {
        denoise_last_step(p, provider, &mut ctx_run, &mut state)?;
        check_finite_at(&state, grid.n_steps())?;
        if let Some(tr) = trace.as_mut() {
            tr.push(state.clone());
        }
    }

    Ok(RunResult {
        state,
        total_nfe: ctx_run.nfe,
        trace,
    })
}
