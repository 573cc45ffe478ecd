//! Metric properties, truncation-order checks, and directional error-curve
//! experiments on the exact Gaussian oracle.

use psld_core::analysis::{
    gaussian_w2, log_log_slope, mat2_sqrt_psd, mean_propagation_errors, score_reuse_gap,
    terminal_error, truncation_residual, weak_error_curve, Metric, ProbeScore,
};
use psld_core::integrators::{Scheme, SchemeSpec, Striding, TimeGrid};
use psld_core::model::{GaussianDataSpec, GaussianMoments, Mat2, PsldParams};
use psld_core::rng::{normal_pair_at, Stream};

fn random_psd(seed: u64, idx: u64) -> Mat2 {
    let (a, b) = normal_pair_at(seed, Stream::PerturbationInit, idx, 0, 0);
    let (c, d) = normal_pair_at(seed, Stream::PerturbationInit, idx, 1, 0);
    let g = Mat2::new(a, b, c, d);
    // Gram matrix plus a small ridge keeps it comfortably PSD.
    g.transpose().matmul(&g).add(&Mat2::diag(0.05, 0.05))
}

fn random_moments(seed: u64, idx: u64) -> GaussianMoments {
    let (mx, mm) = normal_pair_at(seed, Stream::StationaryInit, idx, 0, 0);
    GaussianMoments {
        mu: vec![[mx, mm]],
        sigma: vec![random_psd(seed, idx)],
    }
}

#[test]
fn sqrt_of_random_psd_squares_back() {
    for idx in 0..100 {
        let s = random_psd(7, idx);
        let r = mat2_sqrt_psd(&s).unwrap();
        let rr = r.matmul(&r);
        let scale = s.max_abs().max(1.0);
        assert!(rr.sub(&s).max_abs() < 1e-10 * scale, "idx {idx}: {s:?}");
    }
}

#[test]
fn w2_behaves_like_a_metric_on_random_triples() {
    for idx in 0..100 {
        let a = random_moments(11, 3 * idx);
        let b = random_moments(11, 3 * idx + 1);
        let c = random_moments(11, 3 * idx + 2);

        let ab = gaussian_w2(&a, &b).unwrap();
        let ba = gaussian_w2(&b, &a).unwrap();
        let scale = ab.max(1.0);
        assert!((ab - ba).abs() <= 1e-12 * scale, "symmetry: {ab} vs {ba}");

        // Squared-distance roundoff is ~1e-16 * cov_scale^2, so the
        // self-distance floor scales with the covariance size.
        let cov_scale = a.sigma[0].max_abs().max(1.0);
        assert!(gaussian_w2(&a, &a).unwrap() < 3e-7 * cov_scale);
        assert!(ab > 1e-6, "distinct moments separated: {ab}");

        let ac = gaussian_w2(&a, &c).unwrap();
        let bc = gaussian_w2(&b, &c).unwrap();
        assert!(ac <= ab + bc + 1e-9, "triangle: {ac} vs {ab} + {bc}");
    }
}

#[test]
fn zero_score_truncation_is_third_order_against_the_scheme_expansion() {
    // With a zero score the splitting updates are polynomial in h except for
    // the truncated OU decay, so the only residual is the cubic remainder.
    let p = PsldParams::cifar10(1);
    let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
    let hs = [0.04, 0.02, 0.01, 0.005];
    for scheme in [
        Scheme::Noba,
        Scheme::Nbao,
        Scheme::Nobab,
        Scheme::Roba,
        Scheme::Rbao,
        Scheme::Robab,
    ] {
        let r =
            truncation_residual(&p, &data, scheme, ProbeScore::Zero, 0.7, &hs, 20_000, 11)
                .unwrap();
        assert!(
            r.fitted_slope_x >= 2.7,
            "{scheme}: position slope {}",
            r.fitted_slope_x
        );
        assert!(
            r.fitted_slope_m >= 1.9,
            "{scheme}: momentum slope {}",
            r.fitted_slope_m
        );
        // Residuals vanish with h.
        assert!(r.residual_x[0] > *r.residual_x.last().unwrap());
        assert!(r.residual_m[0] > *r.residual_m.last().unwrap());
        assert!(r.flow_residual_x[0] > *r.flow_residual_x.last().unwrap());
    }

    // The Euler-Maruyama mean map is linear in h, so its own expansion is
    // exact and the residual sits at roundoff.
    let r = truncation_residual(&p, &data, Scheme::Em, ProbeScore::Zero, 0.7, &hs, 20_000, 11)
        .unwrap();
    assert!(r.residual_x.iter().all(|&v| v < 1e-12), "{:?}", r.residual_x);
    assert!(r.residual_m.iter().all(|&v| v < 1e-12), "{:?}", r.residual_m);
}

#[test]
fn zero_score_local_truncation_error_is_second_order() {
    // Against the true-flow expansion every scheme is a first-order weak
    // method: the one-step mean error decays at order >= 1.9. The smaller h
    // grid keeps h * beta * nu / 2 well inside the asymptotic regime.
    let p = PsldParams::cifar10(1);
    let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
    let hs = [0.02, 0.01, 0.005, 0.0025];
    for scheme in Scheme::ALL {
        let r =
            truncation_residual(&p, &data, scheme, ProbeScore::Zero, 0.7, &hs, 20_000, 11)
                .unwrap();
        assert!(r.flow_slope_x >= 1.9, "{scheme}: flow x slope {}", r.flow_slope_x);
        assert!(r.flow_slope_m >= 1.9, "{scheme}: flow m slope {}", r.flow_slope_m);
    }
}

#[test]
fn oracle_score_truncation_matches_the_expansion_to_third_order() {
    let p = PsldParams::cifar10(1);
    let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
    let hs = [0.04, 0.02, 0.01, 0.005];
    for scheme in [Scheme::Noba, Scheme::Nbao, Scheme::Nobab, Scheme::Roba, Scheme::Rbao, Scheme::Robab]
    {
        let r =
            truncation_residual(&p, &data, scheme, ProbeScore::Oracle, 0.7, &hs, 20_000, 11)
                .unwrap();
        assert!(
            r.fitted_slope_x >= 2.7,
            "{scheme}: position slope {}",
            r.fitted_slope_x
        );
    }
}

#[test]
fn score_lag_term_matches_the_measured_nbao_rbao_gap() {
    // The naive BAO position update conditions its second evaluation on the
    // updated momentum; sharing the evaluation removes exactly the analytic
    // lag term, to within Monte-Carlo error.
    let p = PsldParams::cifar10(1);
    let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
    let hs = [0.04, 0.02, 0.01];
    let gap = score_reuse_gap(&p, &data, 0.7, &hs, 50_000, 3).unwrap();
    for (i, &h) in gap.h_values.iter().enumerate() {
        for d in 0..1 {
            let z = (gap.measured[i][d] - gap.analytic[i][d]) / gap.std_err[i][d];
            assert!(
                z.abs() <= 3.0,
                "h={h} dim={d}: measured {} vs analytic {} (z={z})",
                gap.measured[i][d],
                gap.analytic[i][d]
            );
        }
    }
}

#[test]
fn em_mean_propagation_has_weak_order_one() {
    let p = PsldParams::cifar10(1);
    let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
    let spec = SchemeSpec::new(Scheme::Em, None, false).unwrap();
    let pts = mean_propagation_errors(&p, &data, &spec, &[25, 50, 100, 200, 400], Striding::Quadratic)
        .unwrap();
    let ns: Vec<f64> = pts.iter().map(|(n, _)| *n as f64).collect();
    let es: Vec<f64> = pts.iter().map(|(_, e)| *e).collect();
    let order = -log_log_slope(&ns, &es);
    assert!(order >= 0.9, "fitted weak order {order}");
    assert!(es.windows(2).all(|w| w[1] < w[0]), "{es:?}");
}

#[test]
fn em_error_curve_decreases_with_budget() {
    let p = PsldParams::cifar10(1);
    let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
    let spec = SchemeSpec::new(Scheme::Em, None, false).unwrap();
    let curve = weak_error_curve(
        &p,
        &data,
        &spec,
        &[25, 50, 100, 200],
        Striding::Quadratic,
        50_000,
        9,
        Metric::W2,
    )
    .unwrap();
    let errs: Vec<f64> = curve.points.iter().map(|pt| pt.error).collect();
    // Successive halvings of the step size shrink the error far beyond the
    // Monte-Carlo floor at this chain count.
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn score_sharing_oba_beats_naive_oba_at_matched_budget() {
    let p = PsldParams::cifar10(2);
    let data = GaussianDataSpec::new(vec![1.0, -0.5], vec![0.25, 0.8]).unwrap();
    let n = 30_000;
    for budget in [50u64, 100] {
        let naive_steps = (budget / Scheme::Noba.nfe_per_step()) as usize;
        let naive = SchemeSpec::new(Scheme::Noba, None, false).unwrap();
        let grid = TimeGrid::new(p.t_max, p.eps_cutoff, naive_steps, Striding::Quadratic).unwrap();
        let (err_naive, nfe_naive) =
            terminal_error(&p, &data, &naive, &grid, n, 7, Metric::W2).unwrap();
        assert_eq!(nfe_naive, budget);

        let reduced_steps = budget as usize;
        let reduced = SchemeSpec::new(Scheme::Roba, Some(0.37), false).unwrap();
        let grid =
            TimeGrid::new(p.t_max, p.eps_cutoff, reduced_steps, Striding::Quadratic).unwrap();
        let (err_reduced, nfe_reduced) =
            terminal_error(&p, &data, &reduced, &grid, n, 7, Metric::W2).unwrap();
        assert_eq!(nfe_reduced, budget);

        assert!(
            err_reduced < err_naive,
            "budget {budget}: reduced {err_reduced} vs naive {err_naive}"
        );
    }
}

#[test]
fn sweep_errors_are_finite_across_the_published_grid() {
    let p = PsldParams::cifar10(1);
    let data = GaussianDataSpec::new(vec![1.0], vec![0.25]).unwrap();
    let template = SchemeSpec::new(Scheme::Roba, None, false).unwrap();
    let grid: Vec<f64> = (1..=12).map(|k| 0.1 * k as f64).collect();
    let sweep = psld_core::analysis::lambda_sweep(
        &p,
        &data,
        &template,
        100,
        &grid,
        Striding::Quadratic,
        5_000,
        1,
    )
    .unwrap();
    assert_eq!(sweep.errors.len(), 12);
    assert!(sweep.errors.iter().all(|e| e.is_finite()));
}
