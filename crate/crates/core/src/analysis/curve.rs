use serde::Serialize;

use super::empirical::empirical_moments;
use super::w2::{gaussian_w2, Metric};
use crate::error::{Error, Result};
use crate::integrators::{sample, sample_with_noise, SampleOptions, SchemeSpec, Striding, TimeGrid};
use crate::model::{
    forward_moments, perturbation_sample, GaussianDataSpec, GaussianMoments, GaussianScoreOracle,
    PsldParams,
};
use crate::rng::ZeroNoise;

/// One (budget, error) measurement on an error curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub n_steps: usize,
    pub nfe: u64,
    pub error: f64,
}

/// Distributional error against the exact terminal marginal as a function of
/// the evaluation budget.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorCurve {
    pub scheme: SchemeSpec,
    pub metric: Metric,
    pub points: Vec<CurvePoint>,
}

/// Exact marginal the sampler is judged against: the cutoff marginal, or the
/// data distribution itself when the run ends with the denoising update.
pub fn terminal_moments(
    p: &PsldParams,
    data: &GaussianDataSpec,
    denoised: bool,
) -> Result<GaussianMoments> {
    let t = if denoised { 0.0 } else { p.eps_cutoff };
    forward_moments(p, data, t)
}

/// Runs one sampling experiment and reports the chosen metric against the
/// exact terminal marginal.
pub fn terminal_error(
    p: &PsldParams,
    data: &GaussianDataSpec,
    spec: &SchemeSpec,
    grid: &TimeGrid,
    n_chains: usize,
    seed: u64,
    metric: Metric,
) -> Result<(f64, u64)> {
    let mut provider = GaussianScoreOracle::new(*p, data.clone());
    let run = sample(p, spec, &mut provider, grid, n_chains, seed, SampleOptions::default())?;
    let moments = empirical_moments(&run.state)?;
    let target = terminal_moments(p, data, spec.denoise_last)?;
    Ok((metric.evaluate(&moments, &target)?, run.total_nfe))
}

/// Weak-error curve over a list of step budgets (ascending).
pub fn weak_error_curve(
    p: &PsldParams,
    data: &GaussianDataSpec,
    spec: &SchemeSpec,
    budgets: &[usize],
    striding: Striding,
    n_chains: usize,
    seed: u64,
    metric: Metric,
) -> Result<ErrorCurve> {
    if budgets.is_empty() {
        return Err(Error::Analysis("empty budget list".into()));
    }
    for w in budgets.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Analysis("budgets must be strictly ascending".into()));
        }
    }
    let mut points = Vec::with_capacity(budgets.len());
    for &n_steps in budgets {
        let grid = TimeGrid::new(p.t_max, p.eps_cutoff, n_steps, striding)?;
        let (error, nfe) = terminal_error(p, data, spec, &grid, n_chains, seed, metric)?;
        points.push(CurvePoint { n_steps, nfe, error });
    }
    Ok(ErrorCurve {
        scheme: *spec,
        metric,
        points,
    })
}

/// Deterministic weak-order probe: exact mean propagation per budget.
///
/// With the affine Gaussian score every update is affine, so running the
/// sampler with zeroed noise on a single chain started at the stationary
/// mean computes `E[x]` exactly; the reported error is the Euclidean
/// distance of that mean from the exact terminal mean.
pub fn mean_propagation_errors(
    p: &PsldParams,
    data: &GaussianDataSpec,
    spec: &SchemeSpec,
    budgets: &[usize],
    striding: Striding,
) -> Result<Vec<(usize, f64)>> {
    let target = terminal_moments(p, data, spec.denoise_last)?;
    let mut out = Vec::with_capacity(budgets.len());
    for &n_steps in budgets {
        let grid = TimeGrid::new(p.t_max, p.eps_cutoff, n_steps, striding)?;
        let mut provider = GaussianScoreOracle::new(*p, data.clone());
        let run = sample_with_noise(
            p,
            spec,
            &mut provider,
            &grid,
            1,
            &ZeroNoise,
            SampleOptions::default(),
        )?;
        let mut err2 = 0.0;
        for d in 0..p.dim {
            err2 += (run.state.x()[d] - target.mu[d][0]).powi(2);
        }
        out.push((n_steps, err2.sqrt()));
    }
    Ok(out)
}

/// Per-seed 2-Wasserstein distance between exact samples and their own law:
/// the Monte-Carlo noise floor of the W2 estimate at this chain count.
pub fn w2_sampling_floor(
    p: &PsldParams,
    data: &GaussianDataSpec,
    t: f64,
    n_chains: usize,
    seeds: &[u64],
) -> Result<Vec<f64>> {
    let target = forward_moments(p, data, t)?;
    let mut floors = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let state = perturbation_sample(p, data, t, n_chains, seed)?;
        let moments = empirical_moments(&state)?;
        floors.push(gaussian_w2(&moments, &target)?);
    }
    Ok(floors)
}
