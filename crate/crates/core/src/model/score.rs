use super::{forward_moments, GaussianDataSpec, JointState, Mat2, PsldParams, ScoreEval};
use crate::error::{Error, Result};

/// Determinant floor below which a marginal is treated as degenerate.
const DET_FLOOR: f64 = 1e-30;

/// The Gaussian score as an affine map per dimension: `s(z, t) = K z + c`
/// with `K = -Sigma_t^{-1}` and `c = Sigma_t^{-1} mu_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineScore {
    pub k: Mat2,
    pub c: [f64; 2],
}

fn precision_blocks(
    p: &PsldParams,
    data: &GaussianDataSpec,
    t: f64,
) -> Result<Vec<(Mat2, [f64; 2], Mat2)>> {
    let moments = forward_moments(p, data, t)?;
    let mut blocks = Vec::with_capacity(p.dim);
    for d in 0..p.dim {
        let sigma = moments.sigma[d];
        let det = sigma.det();
        if det <= DET_FLOOR {
            return Err(Error::DegenerateMarginal { t, det });
        }
        let prec = sigma.inverse().expect("det checked above");
        blocks.push((prec, moments.mu[d], sigma));
    }
    Ok(blocks)
}

/// Exact score of the Gaussian marginal at forward time `t_cond`:
/// per dimension and chain, `(sx, sm) = -Sigma^{-1} ((x, m) - mu)`.
pub fn analytic_score(
    p: &PsldParams,
    data: &GaussianDataSpec,
    state: &JointState,
    t_cond: f64,
) -> Result<ScoreEval> {
    let blocks = precision_blocks(p, data, t_cond)?;
    let n = state.n_chains();
    let dim = state.dim();
    if dim != p.dim {
        return Err(Error::ShapeMismatch(format!(
            "state dim {dim} does not match model dim {}",
            p.dim
        )));
    }

    let mut eval = ScoreEval::zeros_like(state, t_cond);
    for d in 0..dim {
        let (prec, mu, _) = &blocks[d];
        for chain in 0..n {
            let idx = chain * dim + d;
            let zx = state.x()[idx] - mu[0];
            let zm = state.m()[idx] - mu[1];
            eval.sx[idx] = -(prec.a11 * zx + prec.a12 * zm);
            eval.sm[idx] = -(prec.a21 * zx + prec.a22 * zm);
        }
    }
    Ok(eval)
}

/// Affine form of the Gaussian score at forward time `t`, per dimension.
pub fn score_affine(p: &PsldParams, data: &GaussianDataSpec, t: f64) -> Result<Vec<AffineScore>> {
    let blocks = precision_blocks(p, data, t)?;
    Ok(blocks
        .iter()
        .map(|(prec, mu, _)| AffineScore {
            k: prec.scale(-1.0),
            c: prec.matvec(*mu),
        })
        .collect())
}

/// Forward-time derivative of the affine score pieces:
/// `dK/dt = P Sdot P` and `dc/dt = -P Sdot P mu + P F mu` where
/// `P = Sigma^{-1}` and `Sdot = F Sigma + Sigma F^T + G G^T`.
pub fn score_affine_dt(
    p: &PsldParams,
    data: &GaussianDataSpec,
    t: f64,
) -> Result<Vec<AffineScore>> {
    let blocks = precision_blocks(p, data, t)?;
    let f = p.drift_matrix();
    let q = p.diffusion_squared();
    Ok(blocks
        .iter()
        .map(|(prec, mu, sigma)| {
            let sdot = f
                .matmul(sigma)
                .add(&sigma.matmul(&f.transpose()))
                .add(&q);
            let k_dot = prec.matmul(&sdot).matmul(prec);
            let mu_dot = f.matvec(*mu);
            let psp_mu = k_dot.matvec(*mu);
            let p_mu_dot = prec.matvec(mu_dot);
            AffineScore {
                k: k_dot,
                c: [p_mu_dot[0] - psp_mu[0], p_mu_dot[1] - psp_mu[1]],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn setup() -> (PsldParams, GaussianDataSpec) {
        let p = PsldParams::cifar10(1);
        let data = GaussianDataSpec::new(vec![0.3], vec![0.7]).unwrap();
        (p, data)
    }

    #[test]
    fn score_vanishes_at_the_mean() {
        let (p, data) = setup();
        let t = 0.4;
        let m = forward_moments(&p, &data, t).unwrap();
        let state =
            JointState::new(vec![m.mu[0][0]], vec![m.mu[0][1]], 1, 1, t).unwrap();
        let se = analytic_score(&p, &data, &state, t).unwrap();
        assert_abs_diff_eq!(se.sx[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(se.sm[0], 0.0, epsilon = 1e-12);
        assert_eq!(se.t_cond, t);
    }

    #[test]
    fn identity_covariance_gives_negated_offset() {
        // With Sigma = I, score = -(z - mu); check offset (1, -2) -> (-1, 2).
        let prec = Mat2::identity();
        let (zx, zm) = (1.0, -2.0);
        let sx = -(prec.a11 * zx + prec.a12 * zm);
        let sm = -(prec.a21 * zx + prec.a22 * zm);
        assert_eq!((sx, sm), (-1.0, 2.0));
    }

    #[test]
    fn affine_form_matches_pointwise_score() {
        let (p, data) = setup();
        let t = 0.5;
        let state = JointState::new(vec![0.3], vec![-0.1], 1, 1, t).unwrap();
        let se = analytic_score(&p, &data, &state, t).unwrap();
        let aff = &score_affine(&p, &data, t).unwrap()[0];
        let sx = aff.k.a11 * 0.3 + aff.k.a12 * (-0.1) + aff.c[0];
        let sm = aff.k.a21 * 0.3 + aff.k.a22 * (-0.1) + aff.c[1];
        assert_abs_diff_eq!(se.sx[0], sx, epsilon = 1e-13);
        assert_abs_diff_eq!(se.sm[0], sm, epsilon = 1e-13);
    }

    #[test]
    fn affine_dt_matches_finite_differences() {
        let (p, data) = setup();
        let (t, dt) = (0.5, 1e-6);
        let hi = &score_affine(&p, &data, t + dt).unwrap()[0];
        let lo = &score_affine(&p, &data, t - dt).unwrap()[0];
        let ddt = &score_affine_dt(&p, &data, t).unwrap()[0];
        let fd_k = hi.k.sub(&lo.k).scale(1.0 / (2.0 * dt));
        assert_abs_diff_eq!(ddt.k.a11, fd_k.a11, epsilon = 1e-4 * ddt.k.max_abs().max(1.0));
        assert_abs_diff_eq!(ddt.k.a12, fd_k.a12, epsilon = 1e-4 * ddt.k.max_abs().max(1.0));
        assert_abs_diff_eq!(ddt.k.a22, fd_k.a22, epsilon = 1e-4 * ddt.k.max_abs().max(1.0));
        for i in 0..2 {
            let fd_c = (hi.c[i] - lo.c[i]) / (2.0 * dt);
            assert_abs_diff_eq!(ddt.c[i], fd_c, epsilon = 1e-4 * ddt.c[i].abs().max(1.0));
        }
    }
}
