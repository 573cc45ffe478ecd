use serde::{Deserialize, Serialize};

use super::{GaussianDataSpec, JointState, Mat2, PsldParams};
use crate::error::{Error, Result};
use crate::rng::{normal_pair_at, Stream};

/// Stabilizing value added to covariance diagonals before Cholesky.
pub const CHOLESKY_JITTER: f64 = 1e-9;

/// Per-dimension Gaussian marginal of the joint process: mean 2-vector and
/// 2x2 covariance block. Cross-dimension covariance is zero by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    /// `[dim]` mean pairs `(E[x_i], E[m_i])`.
    pub mu: Vec<[f64; 2]>,
    /// `[dim]` covariance blocks.
    pub sigma: Vec<Mat2>,
}

impl GaussianMoments {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Symmetry and positive-semidefiniteness up to roundoff.
    pub fn validate_psd(&self) -> Result<()> {
        if self.mu.len() != self.sigma.len() {
            return Err(Error::ShapeMismatch(
                "moments mu/sigma length mismatch".into(),
            ));
        }
        for (i, s) in self.sigma.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::NotPsd(format!("sigma[{i}] has non-finite entries")));
            }
            let scale = s.max_abs().max(1.0);
            if (s.a12 - s.a21).abs() > 1e-12 * scale {
                return Err(Error::NotPsd(format!(
                    "sigma[{i}] asymmetric: a12={} a21={}",
                    s.a12, s.a21
                )));
            }
            if s.det() < -1e-12 * scale * scale || s.trace() < 0.0 {
                return Err(Error::NotPsd(format!(
                    "sigma[{i}] not PSD: det={} trace={}",
                    s.det(),
                    s.trace()
                )));
            }
        }
        Ok(())
    }
}

/// Solves the stationary Lyapunov equation `F S + S F^T + Q = 0` for the
/// symmetric 2x2 block `S`.
fn lyapunov_stationary(f: &Mat2, q: &Mat2) -> Result<Mat2> {
    // Unknowns (s11, s12, s22); rows are the (1,1), (1,2), (2,2) equations.
    let a = [
        [2.0 * f.a11, 2.0 * f.a12, 0.0],
        [f.a21, f.a11 + f.a22, f.a12],
        [0.0, 2.0 * f.a21, 2.0 * f.a22],
    ];
    let b = [-q.a11, -q.a12, -q.a22];
    let s = solve3(a, b).ok_or_else(|| {
        Error::InvalidParams("stationary Lyapunov system is singular".into())
    })?;
    Ok(Mat2::new(s[0], s[1], s[1], s[2]))
}

/// 3x3 linear solve by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let k = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= k * a[col][c];
            }
            b[row] -= k * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c in (row + 1)..3 {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Stationary covariance block of the forward process (equals `diag(1, M)`).
pub fn stationary_covariance(p: &PsldParams) -> Result<Mat2> {
    lyapunov_stationary(&p.drift_matrix(), &p.diffusion_squared())
}

/// Exact marginal moments of the forward process at time `t` for Gaussian
/// data.
///
/// Per dimension, `mu_t = exp(F t) (mu0, 0)` and `Sigma_t` solves the moment
/// ODE `dS/dt = F S + S F^T + G G^T` from `S_0 = diag(var0, gamma*M)`; with a
/// constant drift the solution is `S_inf + Phi (S_0 - S_inf) Phi^T` where
/// `S_inf` is the stationary covariance and `Phi = exp(F t)`.
pub fn forward_moments(p: &PsldParams, data: &GaussianDataSpec, t: f64) -> Result<GaussianMoments> {
    if !(0.0..=p.t_max).contains(&t) {
        return Err(Error::TimeOutOfRange { t, t_max: p.t_max });
    }
    data.validate_dim(p.dim)?;

    let f = p.drift_matrix();
    let phi = f.exp_scaled(t);
    let phi_t = phi.transpose();
    let s_inf = stationary_covariance(p)?;
    let gamma_m = p.gamma_init * p.mass();

    let mut mu = Vec::with_capacity(p.dim);
    let mut sigma = Vec::with_capacity(p.dim);
    for i in 0..p.dim {
        mu.push(phi.matvec([data.mu0_x[i], 0.0]));
        let s0 = Mat2::diag(data.var0_x[i], gamma_m);
        let s = s_inf.add(&phi.matmul(&s0.sub(&s_inf)).matmul(&phi_t));
        // Kill roundoff skew; the exact solution is symmetric.
        let off = 0.5 * (s.a12 + s.a21);
        sigma.push(Mat2::new(s.a11, off, off, s.a22));
    }
    Ok(GaussianMoments { mu, sigma })
}

/// Lower Cholesky factor (l11, l21, l22) of a symmetric 2x2 block with
/// `jitter` added to the diagonal.
pub(crate) fn cholesky2(s: &Mat2, jitter: f64) -> Result<[f64; 3]> {
    let a11 = s.a11 + jitter;
    let a22 = s.a22 + jitter;
    if a11 <= 0.0 {
        return Err(Error::NotPsd(format!("leading entry {a11} <= 0")));
    }
    let l11 = a11.sqrt();
    let l21 = s.a21 / l11;
    let rem = a22 - l21 * l21;
    if rem <= 0.0 {
        return Err(Error::NotPsd(format!("Schur complement {rem} <= 0")));
    }
    Ok([l11, l21, rem.sqrt()])
}

/// Draws `n` i.i.d. chains from the perturbation kernel at forward time `t`.
///
/// Samples `N(mu_t, Sigma_t + jitter*I)` per dimension through the 2x2
/// Cholesky factor; fully determined by `seed`.
pub fn perturbation_sample(
    p: &PsldParams,
    data: &GaussianDataSpec,
    t: f64,
    n_chains: usize,
    seed: u64,
) -> Result<JointState> {
    let moments = forward_moments(p, data, t)?;
    let mut chol = Vec::with_capacity(p.dim);
    for s in &moments.sigma {
        chol.push(cholesky2(s, CHOLESKY_JITTER)?);
    }

    let mut state = JointState::zeros(n_chains, p.dim, t);
    let (x, m) = state.xm_mut();
    for chain in 0..n_chains {
        for d in 0..p.dim {
            let (e1, e2) = normal_pair_at(seed, Stream::PerturbationInit, 0, chain as u64, d as u64);
            let [l11, l21, l22] = chol[d];
            let idx = chain * p.dim + d;
            x[idx] = moments.mu[d][0] + l11 * e1;
            m[idx] = moments.mu[d][1] + l21 * e1 + l22 * e2;
        }
    }
    Ok(state)
}
