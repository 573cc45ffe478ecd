use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestep striding policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Striding {
    /// `t_i = eps + (T - eps) (i/N)^2`; concentrates steps near the data end.
    Quadratic,
    Uniform,
}

impl std::str::FromStr for Striding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quadratic" => Ok(Striding::Quadratic),
            "uniform" => Ok(Striding::Uniform),
            other => Err(Error::Grid(format!("unknown striding `{other}`"))),
        }
    }
}

/// The decreasing sequence of sampling times from `T` down to `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    striding: Striding,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, eps: f64, n_steps: usize, striding: Striding) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::Grid(format!("n_steps must be >= 2, got {n_steps}")));
        }
        if !(eps < t_max) || !eps.is_finite() || !t_max.is_finite() || eps < 0.0 {
            return Err(Error::Grid(format!(
                "need 0 <= eps < t_max, got eps={eps}, t_max={t_max}"
            )));
        }
        let n = n_steps as f64;
        let mut times = Vec::with_capacity(n_steps + 1);
        for j in 0..=n_steps {
            let t = if j == 0 {
                t_max
            } else if j == n_steps {
                eps
            } else {
                let frac = (n_steps - j) as f64 / n;
                match striding {
                    Striding::Quadratic => eps + (t_max - eps) * frac * frac,
                    Striding::Uniform => eps + (t_max - eps) * frac,
                }
            };
            times.push(t);
        }
        for w in times.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Grid(format!(
                    "grid times not strictly decreasing near {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            times,
            striding,
            n_steps,
        })
    }

    /// Grid points, strictly decreasing; `times()[0] == T`, last is `eps`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn striding(&self) -> Striding {
        self.striding
    }

    /// Context for composed step `k` (from `times[k]` to `times[k+1]`).
    pub fn step_context(&self, k: usize) -> StepContext {
        let tau0 = self.times[k];
        let tau1 = self.times[k + 1];
        StepContext::from_forward_times(self.times[0].max(tau0), tau0, tau1)
    }
}

/// Per-step time bookkeeping.
///
/// `t` is the reverse-time position (forward time is `T - t`), `h` the step
/// size in reverse time, and `t_bar` the midpoint of the two consecutive
/// forward times, `((T-t) + (T-t-h)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepContext {
    pub t: f64,
    pub h: f64,
    pub t_bar: f64,
}

impl StepContext {
    /// Builds the context from the horizon and the two forward grid times.
    pub fn from_forward_times(t_max: f64, tau0: f64, tau1: f64) -> Self {
        Self {
            t: t_max - tau0,
            h: tau0 - tau1,
            t_bar: (tau0 + tau1) / 2.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_small_grid_matches_closed_form() {
        let g = TimeGrid::new(1.0, 0.0, 2, Striding::Quadratic).unwrap();
        assert_eq!(g.times(), &[1.0, 0.25, 0.0]);
    }

    #[test]
    fn uniform_grid_is_equally_spaced() {
        let g = TimeGrid::new(1.0, 1e-3, 4, Striding::Uniform).unwrap();
        assert_eq!(g.times().len(), 5);
        assert_eq!(g.times()[0], 1.0);
        assert_eq!(*g.times().last().unwrap(), 1e-3);
        let h0 = g.times()[0] - g.times()[1];
        for w in g.times().windows(2) {
            assert_abs_diff_eq!(w[0] - w[1], h0, epsilon = 1e-12);
        }
    }

    #[test]
    fn quadratic_steps_shrink_toward_eps() {
        let g = TimeGrid::new(1.0, 1e-3, 100, Striding::Quadratic).unwrap();
        let first = g.times()[0] - g.times()[1];
        let last = g.times()[99] - g.times()[100];
        assert!(last < first);
        // Monotone step sizes along the whole grid.
        let steps: Vec<f64> = g.times().windows(2).map(|w| w[0] - w[1]).collect();
        assert!(steps.windows(2).all(|s| s[1] < s[0]));
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(TimeGrid::new(1.0, 1e-3, 1, Striding::Uniform).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 10, Striding::Uniform).is_err());
        assert!(TimeGrid::new(1.0, 2.0, 10, Striding::Quadratic).is_err());
    }

    #[test]
    fn step_context_midpoint() {
        let g = TimeGrid::new(1.0, 1e-3, 4, Striding::Uniform).unwrap();
        let ctx = g.step_context(0);
        assert_abs_diff_eq!(ctx.t, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ctx.h, g.times()[0] - g.times()[1], epsilon = 1e-15);
        assert_abs_diff_eq!(
            ctx.t_bar,
            (g.times()[0] + g.times()[1]) / 2.0,
            epsilon = 1e-15
        );
    }
}
