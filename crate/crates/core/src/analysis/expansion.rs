//! Second-order mean expansions of the composed update steps.
//!
//! For the Gaussian oracle the score is affine, so every sub-step acts as an
//! affine map on one dimension's homogeneous vector `(x, m, 1)` and the mean
//! of a composed step is an affine-map-valued function of the step size `h`.
//! This module builds that map symbolically as a polynomial in `h` truncated
//! at degree two, by interpreting exactly the same sub-step tables the
//! numerical sampler runs. The truncated map is the Ito-Taylor second-order
//! prediction of the scheme's one-step mean; a matching expansion of the true
//! reverse flow gives the local (weak) truncation baseline.

use crate::integrators::{composition, Cond, Scheme, SubStep};
use crate::model::{AffineScore, PsldParams};

/// Scalar polynomial in `h`, truncated at degree two.
#[derive(Debug, Clone, Copy)]
struct SPoly([f64; 3]);

impl SPoly {
    const fn constant(c: f64) -> Self {
        SPoly([c, 0.0, 0.0])
    }

    const fn linear(c0: f64, c1: f64) -> Self {
        SPoly([c0, c1, 0.0])
    }
}

/// Homogeneous row vector `(w_x, w_m, w_1)` per polynomial degree.
#[derive(Debug, Clone, Copy)]
struct RowPoly([[f64; 3]; 3]);

impl RowPoly {
    const fn zero() -> Self {
        RowPoly([[0.0; 3]; 3])
    }

    /// Degree-zero unit row selecting one component.
    fn unit(component: usize) -> Self {
        let mut r = Self::zero();
        r.0[0][component] = 1.0;
        r
    }

    fn add(&self, o: &RowPoly) -> RowPoly {
        let mut r = Self::zero();
        for d in 0..3 {
            for c in 0..3 {
                r.0[d][c] = self.0[d][c] + o.0[d][c];
            }
        }
        r
    }

    fn scale(&self, s: f64) -> RowPoly {
        let mut r = *self;
        for d in 0..3 {
            for c in 0..3 {
                r.0[d][c] *= s;
            }
        }
        r
    }

    /// Truncated product with a scalar polynomial.
    fn mul_spoly(&self, s: &SPoly) -> RowPoly {
        let mut r = Self::zero();
        for da in 0..3 {
            for db in 0..3 {
                if da + db > 2 {
                    continue;
                }
                for c in 0..3 {
                    r.0[da + db][c] += self.0[da][c] * s.0[db];
                }
            }
        }
        r
    }

    fn eval(&self, h: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = self.0[0][c] + h * self.0[1][c] + h * h * self.0[2][c];
        }
        out
    }
}

/// Affine score pieces of one dimension at the probe time: value and forward
/// time derivative.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScorePieces {
    pub at: AffineScore,
    pub dt: AffineScore,
}

/// Truncated mean map of one composed step, per dimension.
#[derive(Debug, Clone)]
pub(crate) struct MeanExpansion {
    x: Vec<RowPoly>,
    m: Vec<RowPoly>,
}

impl MeanExpansion {
    /// Predicted `(x, m)` mean after one step of size `h` from mean `v0`.
    pub fn predict(&self, d: usize, h: f64, v0: [f64; 3]) -> [f64; 2] {
        let xr = self.x[d].eval(h);
        let mr = self.m[d].eval(h);
        [
            xr[0] * v0[0] + xr[1] * v0[1] + xr[2] * v0[2],
            mr[0] * v0[0] + mr[1] * v0[1] + mr[2] * v0[2],
        ]
    }
}

/// Score coefficient polynomials for an evaluation conditioned at the step
/// start (`tau0`) or at the step end (`tau0 - h`, expanded to first order).
fn score_coefficients(pieces: Option<&ScorePieces>, cond: Cond) -> [SPoly; 6] {
    let Some(sp) = pieces else {
        return [SPoly::constant(0.0); 6];
    };
    let first_order = |v: f64, dv: f64| match cond {
        Cond::StepStart => SPoly::constant(v),
        Cond::StepEnd => SPoly::linear(v, -dv),
    };
    [
        first_order(sp.at.k.a11, sp.dt.k.a11),
        first_order(sp.at.k.a12, sp.dt.k.a12),
        first_order(sp.at.k.a21, sp.dt.k.a21),
        first_order(sp.at.k.a22, sp.dt.k.a22),
        first_order(sp.at.c[0], sp.dt.c[0]),
        first_order(sp.at.c[1], sp.dt.c[1]),
    ]
}

/// Truncated mean map of one composed step of `scheme`.
///
/// `scores[d]`, when present, carries the affine Gaussian score of dimension
/// `d` at the step-start time; `None` models a zero-score provider.
pub(crate) fn scheme_mean_expansion(
    p: &PsldParams,
    scheme: Scheme,
    scores: &[Option<ScorePieces>],
) -> MeanExpansion {
    let one = RowPoly::unit(2);
    let half_beta = p.beta / 2.0;
    let two_gamma = 2.0 * p.gamma_cap;
    let two_nu = 2.0 * p.nu;
    let two_m_nu = 2.0 * p.mass() * p.nu;
    let ax = p.beta * p.gamma_cap / 2.0;
    let am = p.beta * p.nu / 2.0;
    let decay_x = SPoly([1.0, -ax, ax * ax / 2.0]);
    let decay_m = SPoly([1.0, -am, am * am / 2.0]);

    let mut expansion = MeanExpansion {
        x: Vec::with_capacity(scores.len()),
        m: Vec::with_capacity(scores.len()),
    };

    for pieces in scores {
        let mut x = RowPoly::unit(0);
        let mut m = RowPoly::unit(1);
        let mut evals: Vec<(RowPoly, RowPoly)> = Vec::with_capacity(3);

        for sub in composition(scheme) {
            match *sub {
                SubStep::Ou => {
                    x = x.mul_spoly(&decay_x);
                    m = m.mul_spoly(&decay_m);
                }
                SubStep::Eval { cond } => {
                    let [k11, k12, k21, k22, c1, c2] =
                        score_coefficients(pieces.as_ref(), cond);
                    let sx = x
                        .mul_spoly(&k11)
                        .add(&m.mul_spoly(&k12))
                        .add(&one.mul_spoly(&c1));
                    let sm = x
                        .mul_spoly(&k21)
                        .add(&m.mul_spoly(&k22))
                        .add(&one.mul_spoly(&c2));
                    evals.push((sx, sm));
                }
                SubStep::B { frac, eval } => {
                    let (_, sm) = &evals[eval];
                    let bracket = x.add(&m.scale(two_nu)).add(&sm.scale(two_m_nu));
                    m = m.add(&bracket.mul_spoly(&SPoly::linear(0.0, frac * half_beta)));
                }
                SubStep::A { eval } => {
                    let (sx, _) = &evals[eval];
                    let bracket = x
                        .scale(two_gamma)
                        .add(&m.scale(-p.m_inv))
                        .add(&sx.scale(two_gamma));
                    x = x.add(&bracket.mul_spoly(&SPoly::linear(0.0, half_beta)));
                }
                SubStep::EulerMaruyama { eval } => {
                    let (sx, sm) = &evals[eval];
                    let step = SPoly::linear(0.0, half_beta);
                    let bx = x
                        .scale(p.gamma_cap)
                        .add(&m.scale(-p.m_inv))
                        .add(&sx.scale(two_gamma));
                    let bm = x.add(&m.scale(p.nu)).add(&sm.scale(two_m_nu));
                    let x_new = x.add(&bx.mul_spoly(&step));
                    let m_new = m.add(&bm.mul_spoly(&step));
                    x = x_new;
                    m = m_new;
                }
            }
        }
        expansion.x.push(x);
        expansion.m.push(m);
    }
    expansion
}

fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

/// Second-order expansion of the true reverse-flow mean:
/// `v(h) = (I + h W + (h^2/2)(W^2 - dW/dtau)) v0` with `W` the homogeneous
/// affine reverse drift at the step-start time.
pub(crate) fn flow_mean_expansion(
    p: &PsldParams,
    scores: &[Option<ScorePieces>],
) -> MeanExpansion {
    let half_beta = p.beta / 2.0;
    let two_gamma = 2.0 * p.gamma_cap;
    let two_m_nu = 2.0 * p.mass() * p.nu;

    let mut expansion = MeanExpansion {
        x: Vec::with_capacity(scores.len()),
        m: Vec::with_capacity(scores.len()),
    };
    for pieces in scores {
        let (k, c, kd, cd) = match pieces {
            Some(sp) => (sp.at.k, sp.at.c, sp.dt.k, sp.dt.c),
            None => (
                crate::model::Mat2::zero(),
                [0.0; 2],
                crate::model::Mat2::zero(),
                [0.0; 2],
            ),
        };
        let w = [
            [
                half_beta * (p.gamma_cap + two_gamma * k.a11),
                half_beta * (-p.m_inv + two_gamma * k.a12),
                half_beta * two_gamma * c[0],
            ],
            [
                half_beta * (1.0 + two_m_nu * k.a21),
                half_beta * (p.nu + two_m_nu * k.a22),
                half_beta * two_m_nu * c[1],
            ],
            [0.0, 0.0, 0.0],
        ];
        let w_dtau = [
            [
                half_beta * two_gamma * kd.a11,
                half_beta * two_gamma * kd.a12,
                half_beta * two_gamma * cd[0],
            ],
            [
                half_beta * two_m_nu * kd.a21,
                half_beta * two_m_nu * kd.a22,
                half_beta * two_m_nu * cd[1],
            ],
            [0.0, 0.0, 0.0],
        ];
        let w2 = mat3_mul(&w, &w);

        let row = |i: usize| {
            let mut r = RowPoly::zero();
            r.0[0][i] = 1.0;
            r.0[1] = w[i];
            for cidx in 0..3 {
                r.0[2][cidx] = 0.5 * (w2[i][cidx] - w_dtau[i][cidx]);
            }
            r
        };
        expansion.x.push(row(0));
        expansion.m.push(row(1));
    }
    expansion
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{score_affine, score_affine_dt, GaussianDataSpec};
    use approx::assert_abs_diff_eq;

    fn pieces(p: &PsldParams, data: &GaussianDataSpec, tau: f64) -> Vec<Option<ScorePieces>> {
        let at = score_affine(p, data, tau).unwrap();
        let dt = score_affine_dt(p, data, tau).unwrap();
        at.into_iter()
            .zip(dt)
            .map(|(at, dt)| Some(ScorePieces { at, dt }))
            .collect()
    }

    /// Fine RK4 integration of the affine reverse-flow mean ODE.
    fn rk4_flow_mean(
        p: &PsldParams,
        data: &GaussianDataSpec,
        tau0: f64,
        h: f64,
        v0: [f64; 3],
        steps: usize,
    ) -> [f64; 2] {
        let half_beta = p.beta / 2.0;
        let two_gamma = 2.0 * p.gamma_cap;
        let two_m_nu = 2.0 * p.mass() * p.nu;
        let deriv = |tau: f64, v: [f64; 2]| {
            let aff = &score_affine(p, data, tau).unwrap()[0];
            let sx = aff.k.a11 * v[0] + aff.k.a12 * v[1] + aff.c[0];
            let sm = aff.k.a21 * v[0] + aff.k.a22 * v[1] + aff.c[1];
            [
                half_beta * (p.gamma_cap * v[0] - p.m_inv * v[1] + two_gamma * sx),
                half_beta * (v[0] + p.nu * v[1] + two_m_nu * sm),
            ]
        };
        let dt = h / steps as f64;
        let mut v = [v0[0], v0[1]];
        let mut t_rev = 0.0;
        for _ in 0..steps {
            let tau = |tr: f64| tau0 - tr;
            let k1 = deriv(tau(t_rev), v);
            let k2 = deriv(tau(t_rev + dt / 2.0), [v[0] + dt / 2.0 * k1[0], v[1] + dt / 2.0 * k1[1]]);
            let k3 = deriv(tau(t_rev + dt / 2.0), [v[0] + dt / 2.0 * k2[0], v[1] + dt / 2.0 * k2[1]]);
            let k4 = deriv(tau(t_rev + dt), [v[0] + dt * k3[0], v[1] + dt * k3[1]]);
            v[0] += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            v[1] += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            t_rev += dt;
        }
        v
    }

    #[test]
    fn flow_expansion_matches_rk4_to_third_order() {
        let p = PsldParams::cifar10(1);
        let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
        let tau0 = 0.3;
        let sp = pieces(&p, &data, tau0);
        let flow = flow_mean_expansion(&p, &sp);
        let v0 = [0.4, -0.2, 1.0];

        let mut prev_ratio = None;
        for &h in &[0.02, 0.01, 0.005] {
            let exact = rk4_flow_mean(&p, &data, tau0, h, v0, 400);
            let pred = flow.predict(0, h, v0);
            let err = ((exact[0] - pred[0]).powi(2) + (exact[1] - pred[1]).powi(2)).sqrt();
            if let Some(prev) = prev_ratio {
                // Third-order remainder: halving h should cut the error ~8x.
                let ratio: f64 = prev / err;
                assert!(ratio > 6.0, "ratio {ratio}");
            }
            prev_ratio = Some(err);
        }
    }

    #[test]
    fn zero_score_em_expansion_is_the_euler_map() {
        // With zero score the EM mean map is exactly I + h*D, so the
        // expansion's degree-2 coefficients must vanish.
        let p = PsldParams::cifar10(1);
        let exp = scheme_mean_expansion(&p, Scheme::Em, &[None]);
        let d = p.drift_matrix().scale(-1.0); // reverse-time drift -F
        let xr = exp.x[0];
        assert_abs_diff_eq!(xr.0[1][0], d.a11, epsilon = 1e-14);
        assert_abs_diff_eq!(xr.0[1][1], d.a12, epsilon = 1e-14);
        assert_eq!(xr.0[2], [0.0; 3]);
        let mr = exp.m[0];
        assert_abs_diff_eq!(mr.0[1][0], d.a21, epsilon = 1e-14);
        assert_abs_diff_eq!(mr.0[1][1], d.a22, epsilon = 1e-14);
        assert_eq!(mr.0[2], [0.0; 3]);
    }
}
