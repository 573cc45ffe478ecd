use super::StepContext;
use crate::error::Result;
use crate::model::{JointState, PsldParams, ScoreEval};
use crate::rng::{NoiseSource, Stream};

/// Scalar coefficients of the exact OU update over one step.
///
/// Position: `x' = decay_x * x + sigma_x * eps_x`; momentum mirrors it with
/// `decay_m`, `sigma_m`. With `lambda_s` absent the position noise is the
/// exact-OU amount `sqrt(1 - exp(-h beta Gamma))`; with `lambda_s` present
/// the exponent becomes `t_bar * lambda_s * beta * Gamma`, controlling how
/// much noise enters the position space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuCoefficients {
    pub decay_x: f64,
    pub sigma_x: f64,
    pub decay_m: f64,
    pub sigma_m: f64,
}

pub fn ou_coefficients(
    p: &PsldParams,
    ctx: &StepContext,
    lambda_s: Option<f64>,
) -> OuCoefficients {
    let bg = p.beta * p.gamma_cap;
    let bn = p.beta * p.nu;
    let noise_arg = match lambda_s {
        Some(l) => ctx.t_bar * l * bg,
        None => ctx.h * bg,
    };
    OuCoefficients {
        decay_x: (-ctx.h * bg / 2.0).exp(),
        sigma_x: (1.0 - (-noise_arg).exp()).sqrt(),
        decay_m: (-ctx.h * bn / 2.0).exp(),
        sigma_m: p.mass().sqrt() * (1.0 - (-ctx.h * bn).exp()).sqrt(),
    }
}

/// Exact OU sub-step; one fresh pair of standard normals per (chain, dim).
pub fn step_o(
    p: &PsldParams,
    state: &mut JointState,
    ctx: &StepContext,
    lambda_s: Option<f64>,
    noise: &dyn NoiseSource,
    step_index: u64,
) {
    let co = ou_coefficients(p, ctx, lambda_s);
    let dim = state.dim();
    let n = state.n_chains();
    let (x, m) = state.xm_mut();
    for chain in 0..n {
        for d in 0..dim {
            let (ex, em) = noise.normal_pair(Stream::Ou, step_index, chain as u64, d as u64);
            let idx = chain * dim + d;
            x[idx] = co.decay_x * x[idx] + co.sigma_x * ex;
            m[idx] = co.decay_m * m[idx] + co.sigma_m * em;
        }
    }
}

/// Euler position sub-step with a supplied score:
/// `x' = x + (h beta / 2) [2 Gamma x - M^{-1} m + 2 Gamma s^x]`.
pub fn step_a(p: &PsldParams, state: &mut JointState, se: &ScoreEval, h: f64) -> Result<()> {
    se.check_against(state)?;
    let hb2 = h * p.beta / 2.0;
    let two_gamma = 2.0 * p.gamma_cap;
    let m_inv = p.m_inv;
    let (x, m) = state.xm_mut();
    for i in 0..x.len() {
        x[i] += hb2 * (two_gamma * x[i] - m_inv * m[i] + two_gamma * se.sx[i]);
    }
    Ok(())
}

/// Euler momentum sub-step with a supplied score:
/// `m' = m + (h beta / 2) [x + 2 nu m + 2 M nu s^m]`.
pub fn step_b(p: &PsldParams, state: &mut JointState, se: &ScoreEval, h: f64) -> Result<()> {
    se.check_against(state)?;
    let hb2 = h * p.beta / 2.0;
    let two_nu = 2.0 * p.nu;
    let two_m_nu = 2.0 * p.mass() * p.nu;
    let (x, m) = state.xm_mut();
    for i in 0..m.len() {
        m[i] += hb2 * (x[i] + two_nu * m[i] + two_m_nu * se.sm[i]);
    }
    Ok(())
}

/// One Euler-Maruyama update of the full reverse SDE; both components read
/// the pre-update state.
pub(crate) fn step_em(
    p: &PsldParams,
    state: &mut JointState,
    se: &ScoreEval,
    ctx: &StepContext,
    noise: &dyn NoiseSource,
    step_index: u64,
) -> Result<()> {
    se.check_against(state)?;
    let hb2 = ctx.h * p.beta / 2.0;
    let two_gamma = 2.0 * p.gamma_cap;
    let two_m_nu = 2.0 * p.mass() * p.nu;
    let amp_x = (p.beta * p.gamma_cap).sqrt() * ctx.h.sqrt();
    let amp_m = (p.mass() * p.nu * p.beta).sqrt() * ctx.h.sqrt();
    let dim = state.dim();
    let n = state.n_chains();
    let (x, m) = state.xm_mut();
    for chain in 0..n {
        for d in 0..dim {
            let idx = chain * dim + d;
            let (ex, em) = noise.normal_pair(Stream::Em, step_index, chain as u64, d as u64);
            let (x0, m0) = (x[idx], m[idx]);
            x[idx] = x0
                + hb2 * (p.gamma_cap * x0 - p.m_inv * m0 + two_gamma * se.sx[idx])
                + amp_x * ex;
            m[idx] = m0 + hb2 * (x0 + p.nu * m0 + two_m_nu * se.sm[idx]) + amp_m * em;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ZeroNoise;
    use approx::assert_abs_diff_eq;

    fn ctx(h: f64, t_bar: f64) -> StepContext {
        StepContext { t: 0.0, h, t_bar }
    }

    /// Small independent exponential for cross-checking libm.
    fn taylor_exp(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= x / k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn ou_coefficients_derived_scalars() {
        // beta=8, Gamma=0.01, h=0.01: decay e^{-0.0004}, variance 1-e^{-0.0008}.
        let p = PsldParams::cifar10(1);
        let co = ou_coefficients(&p, &ctx(0.01, 0.5), None);
        assert_abs_diff_eq!(co.decay_x, taylor_exp(-0.0004), epsilon = 1e-15);
        assert_abs_diff_eq!(
            co.sigma_x * co.sigma_x,
            1.0 - taylor_exp(-0.0008),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(co.decay_m, taylor_exp(-0.01 * 8.0 * 4.01 / 2.0), epsilon = 1e-12);
    }

    #[test]
    fn lambda_identity_reproduces_naive_coefficients_exactly() {
        // With t_bar * lambda_s == h bitwise, reduced and naive position
        // coefficients are the same floating-point values.
        let p = PsldParams::cifar10(1);
        let h = 0.0123;
        let c = ctx(h, 0.5);
        let lambda = 2.0 * h; // t_bar * lambda = 0.5 * 2h = h exactly
        let naive = ou_coefficients(&p, &c, None);
        let reduced = ou_coefficients(&p, &c, Some(lambda));
        assert_eq!(naive.sigma_x.to_bits(), reduced.sigma_x.to_bits());
        assert_eq!(naive.decay_x.to_bits(), reduced.decay_x.to_bits());
    }

    #[test]
    fn ou_step_with_tiny_h_is_near_identity() {
        let p = PsldParams::cifar10(1);
        let mut state = JointState::new(vec![1.5], vec![-0.5], 1, 1, 1.0).unwrap();
        step_o(&p, &mut state, &ctx(1e-14, 0.5), None, &ZeroNoise, 0);
        assert_abs_diff_eq!(state.x()[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(state.m()[0], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn step_a_hand_value() {
        // beta=2, Gamma=0.5, M^-1=1, h=0.1, x=1, m=2, sx=-1 -> x'=0.8.
        let p = PsldParams {
            beta: 2.0,
            gamma_cap: 0.5,
            nu: 0.5,
            m_inv: 1.0,
            ..PsldParams::cifar10(1)
        };
        let mut state = JointState::new(vec![1.0], vec![2.0], 1, 1, 1.0).unwrap();
        let mut se = ScoreEval::zeros_like(&state, 0.0);
        se.sx[0] = -1.0;
        step_a(&p, &mut state, &se, 0.1).unwrap();
        assert_abs_diff_eq!(state.x()[0], 0.8, epsilon = 1e-14);
        assert_eq!(state.m()[0], 2.0);
    }

    #[test]
    fn step_b_hand_value() {
        // beta=2, nu=0.5, M=1, h=0.1, x=1, m=2, sm=-1 -> m'=2.2.
        let p = PsldParams {
            beta: 2.0,
            gamma_cap: 0.5,
            nu: 0.5,
            m_inv: 1.0,
            ..PsldParams::cifar10(1)
        };
        let mut state = JointState::new(vec![1.0], vec![2.0], 1, 1, 1.0).unwrap();
        let mut se = ScoreEval::zeros_like(&state, 0.0);
        se.sm[0] = -1.0;
        step_b(&p, &mut state, &se, 0.1).unwrap();
        assert_abs_diff_eq!(state.m()[0], 2.2, epsilon = 1e-14);
        assert_eq!(state.x()[0], 1.0);
    }

    #[test]
    fn step_a_zero_gamma_drops_score_and_decay_terms() {
        let p = PsldParams {
            gamma_cap: 1e-300,
            ..PsldParams::cifar10(1)
        };
        let mut state = JointState::new(vec![1.0], vec![2.0], 1, 1, 1.0).unwrap();
        let se = ScoreEval::zeros_like(&state, 0.0);
        let h = 0.1;
        step_a(&p, &mut state, &se, h).unwrap();
        // x' = x - (h beta / 2) M^-1 m
        assert_abs_diff_eq!(
            state.x()[0],
            1.0 - h * p.beta / 2.0 * p.m_inv * 2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn zero_h_is_identity_for_euler_substeps() {
        let p = PsldParams::cifar10(1);
        let mut state = JointState::new(vec![1.0], vec![2.0], 1, 1, 1.0).unwrap();
        let se = ScoreEval::zeros_like(&state, 0.0);
        step_a(&p, &mut state, &se, 0.0).unwrap();
        step_b(&p, &mut state, &se, 0.0).unwrap();
        assert_eq!((state.x()[0], state.m()[0]), (1.0, 2.0));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = PsldParams::cifar10(1);
        let mut state = JointState::new(vec![1.0], vec![2.0], 1, 1, 1.0).unwrap();
        let other = JointState::zeros(2, 1, 1.0);
        let se = ScoreEval::zeros_like(&other, 0.0);
        assert!(step_a(&p, &mut state, &se, 0.1).is_err());
        assert!(step_b(&p, &mut state, &se, 0.1).is_err());
    }
}
