/// Least-squares slope of `ln y` against `ln x`.
///
/// Pairs with non-positive entries are skipped; returns NaN when fewer than
/// two usable points remain.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_power_law_exponent() {
        let xs = [0.04f64, 0.02, 0.01, 0.005];
        let ys: Vec<f64> = xs.iter().map(|h: &f64| 3.0 * h.powi(3)).collect();
        assert_abs_diff_eq!(log_log_slope(&xs, &ys), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_input_gives_nan() {
        assert!(log_log_slope(&[1.0], &[2.0]).is_nan());
        assert!(log_log_slope(&[1.0, 2.0], &[0.0, 0.0]).is_nan());
    }
}
