use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GaussianMoments, Mat2};

/// Distance reported between two Gaussian moment sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Closed-form 2-Wasserstein distance.
    W2,
    /// Euclidean norm of the mean difference.
    MeanAbs,
    /// Frobenius norm of the covariance difference.
    CovFro,
}

impl Metric {
    pub fn evaluate(self, a: &GaussianMoments, b: &GaussianMoments) -> Result<f64> {
        match self {
            Metric::W2 => gaussian_w2(a, b),
            Metric::MeanAbs => {
                check_dims(a, b)?;
                let mut acc = 0.0;
                for (ma, mb) in a.mu.iter().zip(&b.mu) {
                    acc += (ma[0] - mb[0]).powi(2) + (ma[1] - mb[1]).powi(2);
                }
                Ok(acc.sqrt())
            }
            Metric::CovFro => {
                check_dims(a, b)?;
                let mut acc = 0.0;
                for (sa, sb) in a.sigma.iter().zip(&b.sigma) {
                    let d = sa.sub(sb);
                    acc += d.a11 * d.a11 + d.a12 * d.a12 + d.a21 * d.a21 + d.a22 * d.a22;
                }
                Ok(acc.sqrt())
            }
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::W2 => "w2",
            Metric::MeanAbs => "mean_abs",
            Metric::CovFro => "cov_fro",
        })
    }
}

fn check_dims(a: &GaussianMoments, b: &GaussianMoments) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "moment dimensions {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Principal square root of a symmetric PSD 2x2 block:
/// `sqrt(S) = (S + sqrt(det) I) / sqrt(tr + 2 sqrt(det))`.
pub fn mat2_sqrt_psd(s: &Mat2) -> Result<Mat2> {
    let scale = s.max_abs().max(1.0);
    if (s.a12 - s.a21).abs() > 1e-9 * scale {
        return Err(Error::NotPsd(format!("asymmetric block: {s:?}")));
    }
    let det = s.det().max(0.0);
    let tr = s.trace();
    if tr < -1e-12 * scale {
        return Err(Error::NotPsd(format!("negative trace: {s:?}")));
    }
    let denom_sq = tr + 2.0 * det.sqrt();
    if denom_sq <= 0.0 {
        // Only the zero matrix reaches here among PSD inputs.
        if s.max_abs() > 1e-12 * scale {
            return Err(Error::NotPsd(format!("indefinite block: {s:?}")));
        }
        return Ok(Mat2::zero());
    }
    let denom = denom_sq.sqrt();
    Ok(s.add(&Mat2::diag(det.sqrt(), det.sqrt())).scale(1.0 / denom))
}

/// Closed-form 2-Wasserstein distance between Gaussians with per-dimension
/// block structure:
/// `W2^2 = sum_i ||mu_a,i - mu_b,i||^2
///         + tr(S_a,i + S_b,i - 2 (S_b,i^{1/2} S_a,i S_b,i^{1/2})^{1/2})`.
pub fn gaussian_w2(a: &GaussianMoments, b: &GaussianMoments) -> Result<f64> {
    check_dims(a, b)?;
    a.validate_psd()?;
    b.validate_psd()?;
    let mut acc = 0.0;
    for d in 0..a.dim() {
        let (ma, mb) = (a.mu[d], b.mu[d]);
        acc += (ma[0] - mb[0]).powi(2) + (ma[1] - mb[1]).powi(2);

        let sb_half = mat2_sqrt_psd(&b.sigma[d])?;
        let inner = sb_half.matmul(&a.sigma[d]).matmul(&sb_half);
        // Roundoff can skew the product slightly; symmetrize before the root.
        let off = 0.5 * (inner.a12 + inner.a21);
        let cross = mat2_sqrt_psd(&Mat2::new(inner.a11, off, off, inner.a22))?;
        let bures = a.sigma[d].trace() + b.sigma[d].trace() - 2.0 * cross.trace();
        acc += bures.max(0.0);
    }
    Ok(acc.sqrt())
}
