use crate::error::{Error, Result};
use crate::model::{GaussianMoments, JointState, Mat2};

/// Per-dimension sample mean and unbiased 2x2 sample covariance of a batch.
pub fn empirical_moments(state: &JointState) -> Result<GaussianMoments> {
    let n = state.n_chains();
    if n < 2 {
        return Err(Error::Analysis(format!(
            "need at least 2 chains for sample moments, got {n}"
        )));
    }
    let dim = state.dim();
    let nf = n as f64;
    let mut mu = Vec::with_capacity(dim);
    let mut sigma = Vec::with_capacity(dim);
    for d in 0..dim {
        let (mut sx, mut sm) = (0.0, 0.0);
        for chain in 0..n {
            let idx = chain * dim + d;
            sx += state.x()[idx];
            sm += state.m()[idx];
        }
        let mean = [sx / nf, sm / nf];

        let (mut cxx, mut cxm, mut cmm) = (0.0, 0.0, 0.0);
        for chain in 0..n {
            let idx = chain * dim + d;
            let dx = state.x()[idx] - mean[0];
            let dm = state.m()[idx] - mean[1];
            cxx += dx * dx;
            cxm += dx * dm;
            cmm += dm * dm;
        }
        let denom = nf - 1.0;
        mu.push(mean);
        sigma.push(Mat2::new(cxx / denom, cxm / denom, cxm / denom, cmm / denom));
    }
    Ok(GaussianMoments { mu, sigma })
}
