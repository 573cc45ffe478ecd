use serde::Serialize;

use super::expansion::{flow_mean_expansion, scheme_mean_expansion, ScorePieces};
use super::fit::log_log_slope;
use crate::error::{Error, Result};
use crate::integrators::{step_scheme, Scheme, SchemeSpec, StepContext};
use crate::model::{
    perturbation_sample, score_affine, score_affine_dt, GaussianDataSpec, GaussianScoreOracle,
    JointState, PsldParams, RunContext, ScoreProvider, ZeroScoreProvider,
};
use crate::rng::{CounterNoise, ZeroNoise};

/// Which score the probe runs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeScore {
    /// The exact Gaussian score.
    Oracle,
    /// Identically zero score; only the linear dynamics remain.
    Zero,
}

/// One-step mean residuals of a scheme over a range of step sizes.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub scheme: Scheme,
    pub h_values: Vec<f64>,
    /// Deviation of the measured one-step mean from the scheme's own
    /// second-order mean expansion (position component); the remainder of
    /// that expansion is the only contribution, so these decay as h^3.
    pub residual_x: Vec<f64>,
    pub residual_m: Vec<f64>,
    pub fitted_slope_x: f64,
    pub fitted_slope_m: f64,
    /// Deviation from the second-order expansion of the true reverse-flow
    /// mean: the local (weak) truncation error of the scheme, O(h^2).
    pub flow_residual_x: Vec<f64>,
    pub flow_residual_m: Vec<f64>,
    pub flow_slope_x: f64,
    pub flow_slope_m: f64,
}

fn check_h_values(t0: f64, t_max: f64, tau0: f64, h_values: &[f64]) -> Result<()> {
    if h_values.is_empty() {
        return Err(Error::Analysis("empty h grid".into()));
    }
    for w in h_values.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Analysis("h values must be strictly decreasing".into()));
        }
    }
    let h_max = h_values[0];
    if !(h_max > 0.0) || t0 + h_max > t_max || tau0 - h_max < 0.0 {
        return Err(Error::Analysis(format!(
            "probe range invalid: t0={t0}, max h={h_max}, horizon={t_max}"
        )));
    }
    Ok(())
}

fn score_pieces(
    p: &PsldParams,
    data: &GaussianDataSpec,
    tau0: f64,
    score: ProbeScore,
) -> Result<Vec<Option<ScorePieces>>> {
    match score {
        ProbeScore::Zero => Ok(vec![None; p.dim]),
        ProbeScore::Oracle => {
            let at = score_affine(p, data, tau0)?;
            let dt = score_affine_dt(p, data, tau0)?;
            Ok(at
                .into_iter()
                .zip(dt)
                .map(|(at, dt)| Some(ScorePieces { at, dt }))
                .collect())
        }
    }
}

fn chain_means(state: &JointState) -> Vec<[f64; 2]> {
    let dim = state.dim();
    let n = state.n_chains() as f64;
    let mut means = vec![[0.0; 2]; dim];
    for chain in 0..state.n_chains() {
        for d in 0..dim {
            let idx = chain * dim + d;
            means[d][0] += state.x()[idx];
            means[d][1] += state.m()[idx];
        }
    }
    for m in &mut means {
        m[0] /= n;
        m[1] /= n;
    }
    means
}

/// Measures one-step mean residuals of `scheme` against the second-order
/// Ito-Taylor expansions, starting chains from the exact marginal at forward
/// time `T - t0` (`t0` is the reverse-time probe position).
///
/// The step runs with zeroed noise increments: the affine score makes the
/// one-step map affine in the initial state and the noise, so the zero-noise
/// run propagates exactly the mean that an infinite-chain average would.
pub fn truncation_residual(
    p: &PsldParams,
    data: &GaussianDataSpec,
    scheme: Scheme,
    score: ProbeScore,
    t0: f64,
    h_values: &[f64],
    n_chains: usize,
    seed: u64,
) -> Result<TruncationReport> {
    let p = p.validated()?;
    let tau0 = p.t_max - t0;
    check_h_values(t0, p.t_max, tau0, h_values)?;

    let chains0 = perturbation_sample(&p, data, tau0, n_chains, seed)?;
    let mean0 = chain_means(&chains0);

    let pieces = score_pieces(&p, data, tau0, score)?;
    let scheme_exp = scheme_mean_expansion(&p, scheme, &pieces);
    let flow_exp = flow_mean_expansion(&p, &pieces);

    let spec = SchemeSpec::new(scheme, None, false)?;
    let mut oracle: Box<dyn ScoreProvider> = match score {
        ProbeScore::Oracle => Box::new(GaussianScoreOracle::new(p, data.clone())),
        ProbeScore::Zero => Box::new(ZeroScoreProvider),
    };

    let mut residual_x = Vec::with_capacity(h_values.len());
    let mut residual_m = Vec::with_capacity(h_values.len());
    let mut flow_residual_x = Vec::with_capacity(h_values.len());
    let mut flow_residual_m = Vec::with_capacity(h_values.len());

    for &h in h_values {
        let mut state = chains0.clone();
        let ctx = StepContext::from_forward_times(p.t_max, tau0, tau0 - h);
        let mut ctx_run = RunContext::new();
        step_scheme(
            &p,
            &spec,
            oracle.as_mut(),
            &mut ctx_run,
            &mut state,
            &ctx,
            0,
            &ZeroNoise,
        )?;
        let measured = chain_means(&state);

        let (mut ex2, mut em2, mut fx2, mut fm2) = (0.0, 0.0, 0.0, 0.0);
        for d in 0..p.dim {
            let v0 = [mean0[d][0], mean0[d][1], 1.0];
            let pred = scheme_exp.predict(d, h, v0);
            let flow = flow_exp.predict(d, h, v0);
            ex2 += (measured[d][0] - pred[0]).powi(2);
            em2 += (measured[d][1] - pred[1]).powi(2);
            fx2 += (measured[d][0] - flow[0]).powi(2);
            fm2 += (measured[d][1] - flow[1]).powi(2);
        }
        residual_x.push(ex2.sqrt());
        residual_m.push(em2.sqrt());
        flow_residual_x.push(fx2.sqrt());
        flow_residual_m.push(fm2.sqrt());
    }

    Ok(TruncationReport {
        scheme,
        fitted_slope_x: log_log_slope(h_values, &residual_x),
        fitted_slope_m: log_log_slope(h_values, &residual_m),
        flow_slope_x: log_log_slope(h_values, &flow_residual_x),
        flow_slope_m: log_log_slope(h_values, &flow_residual_m),
        h_values: h_values.to_vec(),
        residual_x,
        residual_m,
        flow_residual_x,
        flow_residual_m,
    })
}

/// Measured and analytic one-step position gap between the naive and the
/// score-sharing BAO compositions.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreReuseGap {
    pub h_values: Vec<f64>,
    /// Mean over chains of `x_naive - x_reduced` per h, per dimension.
    pub measured: Vec<Vec<f64>>,
    /// `h beta Gamma * E[s^x(x, m_{t+h}) - s^x(x, m_t)]` per h, per
    /// dimension, evaluated in closed form on the Gaussian oracle.
    pub analytic: Vec<Vec<f64>>,
    /// Monte-Carlo standard error of each measured mean.
    pub std_err: Vec<Vec<f64>>,
}

/// Runs NBAO and RBAO one step from the exact marginal with shared noise and
/// compares their mean position gap to the analytic score-lag term that
/// score reuse cancels.
pub fn score_reuse_gap(
    p: &PsldParams,
    data: &GaussianDataSpec,
    t0: f64,
    h_values: &[f64],
    n_chains: usize,
    seed: u64,
) -> Result<ScoreReuseGap> {
    let p = p.validated()?;
    let tau0 = p.t_max - t0;
    check_h_values(t0, p.t_max, tau0, h_values)?;
    if n_chains < 2 {
        return Err(Error::Analysis("need at least 2 chains".into()));
    }

    let chains0 = perturbation_sample(&p, data, tau0, n_chains, seed)?;
    let mut oracle = GaussianScoreOracle::new(p, data.clone());
    let naive = SchemeSpec::new(Scheme::Nbao, None, false)?;
    let reduced = SchemeSpec::new(Scheme::Rbao, None, false)?;
    // Same noise stream for both schemes: the gap is driven purely by the
    // second score evaluation.
    let noise = CounterNoise::new(seed ^ STEP_NOISE_SALT);

    let exact = score_affine(&p, data, tau0)?;
    let moments = crate::model::forward_moments(&p, data, tau0)?;

    let mut measured = Vec::with_capacity(h_values.len());
    let mut analytic = Vec::with_capacity(h_values.len());
    let mut std_err = Vec::with_capacity(h_values.len());

    for &h in h_values {
        let ctx = StepContext::from_forward_times(p.t_max, tau0, tau0 - h);

        let mut run = |spec: &SchemeSpec| -> Result<JointState> {
            let mut state = chains0.clone();
            let mut ctx_run = RunContext::new();
            step_scheme(&p, spec, &mut oracle, &mut ctx_run, &mut state, &ctx, 0, &noise)?;
            Ok(state)
        };
        let state_n = run(&naive)?;
        let state_r = run(&reduced)?;

        let mut mean_d = vec![0.0; p.dim];
        let mut var_d = vec![0.0; p.dim];
        for d in 0..p.dim {
            let mut acc = 0.0;
            for chain in 0..n_chains {
                let idx = chain * p.dim + d;
                acc += state_n.x()[idx] - state_r.x()[idx];
            }
            let mean = acc / n_chains as f64;
            let mut sq = 0.0;
            for chain in 0..n_chains {
                let idx = chain * p.dim + d;
                let diff = state_n.x()[idx] - state_r.x()[idx] - mean;
                sq += diff * diff;
            }
            mean_d[d] = mean;
            var_d[d] = sq / (n_chains as f64 - 1.0);
        }

        // Closed form: the two schemes share the momentum update, so the gap
        // in s^x comes solely from conditioning on m_{t+h} versus m_t.
        let mut ana_d = vec![0.0; p.dim];
        for d in 0..p.dim {
            let mu = moments.mu[d];
            let aff = &exact[d];
            // E[s^m] vanishes at the mean, so E[m_{t+h}] - E[m_t] is linear.
            let delta_m = h * p.beta / 2.0 * (mu[0] + 2.0 * p.nu * mu[1]);
            ana_d[d] = h * p.beta * p.gamma_cap * aff.k.a12 * delta_m;
        }

        measured.push(mean_d);
        analytic.push(ana_d);
        std_err.push(
            var_d
                .iter()
                .map(|v| (v / n_chains as f64).sqrt())
                .collect(),
        );
    }

    Ok(ScoreReuseGap {
        h_values: h_values.to_vec(),
        measured,
        analytic,
        std_err,
    })
}

/// Keeps the probe's step noise distinct from the initial-draw stream.
const STEP_NOISE_SALT: u64 = 0x9c0f_fee5_eed5_a1f7;
