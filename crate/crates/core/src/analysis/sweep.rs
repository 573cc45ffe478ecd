use serde::Serialize;

use super::curve::terminal_error;
use super::w2::Metric;
use crate::error::{Error, Result};
use crate::integrators::{SchemeSpec, Striding, TimeGrid};
use crate::model::{GaussianDataSpec, PsldParams};

/// Grid-search result over the position-space noise level.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaSweep {
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Argmin of the error; ties break toward the smaller value.
    pub best: f64,
}

/// Evaluates the weak error of a reduced scheme at a fixed budget for each
/// noise level in `lambda_grid` and returns the grid argmin.
pub fn lambda_sweep(
    p: &PsldParams,
    data: &GaussianDataSpec,
    template: &SchemeSpec,
    n_steps: usize,
    lambda_grid: &[f64],
    striding: Striding,
    n_chains: usize,
    seed: u64,
) -> Result<LambdaSweep> {
    if !template.scheme.is_reduced() {
        return Err(Error::Scheme(format!(
            "noise-level sweep requires a reduced scheme, got {}",
            template.scheme
        )));
    }
    if lambda_grid.is_empty() {
        return Err(Error::Analysis("empty lambda grid".into()));
    }

    let grid = TimeGrid::new(p.t_max, p.eps_cutoff, n_steps, striding)?;
    let mut lambdas: Vec<f64> = lambda_grid.to_vec();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut errors = Vec::with_capacity(lambdas.len());
    let mut best = lambdas[0];
    let mut best_err = f64::INFINITY;
    for &l in &lambdas {
        let spec = SchemeSpec::new(template.scheme, Some(l), template.denoise_last)?;
        let (err, _) = terminal_error(p, data, &spec, &grid, n_chains, seed, Metric::W2)?;
        if err < best_err {
            best_err = err;
            best = l;
        }
        errors.push(err);
    }
    Ok(LambdaSweep {
        lambdas,
        errors,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::Scheme;

    fn setup() -> (PsldParams, GaussianDataSpec, SchemeSpec) {
        (
            PsldParams::cifar10(1),
            GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap(),
            SchemeSpec::new(Scheme::Roba, None, false).unwrap(),
        )
    }

    #[test]
    fn single_value_grid_returns_it() {
        let (p, data, spec) = setup();
        let sweep =
            lambda_sweep(&p, &data, &spec, 20, &[0.37], Striding::Quadratic, 256, 0).unwrap();
        assert_eq!(sweep.best, 0.37);
        assert_eq!(sweep.errors.len(), 1);
        assert!(sweep.errors[0].is_finite());
    }

    #[test]
    fn naive_scheme_is_rejected() {
        let (p, data, _) = setup();
        let spec = SchemeSpec::new(Scheme::Noba, None, false).unwrap();
        assert!(lambda_sweep(&p, &data, &spec, 20, &[0.3], Striding::Quadratic, 64, 0).is_err());
    }

    #[test]
    fn ties_break_toward_smaller_lambda() {
        // Degenerate two-point grid with equal values: duplicate lambda.
        let (p, data, spec) = setup();
        let sweep = lambda_sweep(
            &p,
            &data,
            &spec,
            10,
            &[0.5, 0.5],
            Striding::Quadratic,
            64,
            3,
        )
        .unwrap();
        assert_eq!(sweep.best, 0.5);
        assert_eq!(sweep.errors[0], sweep.errors[1]);
    }
}
