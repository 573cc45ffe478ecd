use serde::{Deserialize, Serialize};

/// A 2x2 real matrix acting on one dimension's (x, m) pair.
///
/// Every matrix in the model is block-diagonal with identical 2x2 blocks per
/// dimension, so all linear algebra in the crate reduces to this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

/// Eigenvalue gaps below this are treated as coincident and routed to the
/// series branch of the exponential.
const EIGEN_COINCIDENCE_TOL: f64 = 1e-8;

impl Mat2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        )
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn matmul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn matvec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// `exp(self * t)` in closed form.
    ///
    /// Writing `B = self*t`, `mu = tr(B)/2` and `delta = mu^2 - det(B)`, the
    /// eigenvalues of `B` are `mu +- sqrt(delta)` and
    /// `exp(B) = e^mu (c I + phi (B - mu I))` with `c = cosh(sqrt(delta))`,
    /// `phi = sinh(sqrt(delta))/sqrt(delta)` (trigonometric for negative
    /// `delta`). When the eigenvalue gap `2 sqrt(|delta|)` is below 1e-8 the
    /// pair is treated as coincident and `c`, `phi` are evaluated by series
    /// in `delta` instead.
    pub fn exp_scaled(&self, t: f64) -> Mat2 {
        let b = self.scale(t);
        let mu = b.trace() / 2.0;
        let delta = mu * mu - b.det();
        let gap = 2.0 * delta.abs().sqrt();

        let (c, phi) = if gap < EIGEN_COINCIDENCE_TOL {
            // cosh/sinhc series in delta; converges in a couple of terms here.
            let mut c = 0.0;
            let mut phi = 0.0;
            let mut term = 1.0;
            for k in 0..8u32 {
                let k2 = (2 * k) as f64;
                c += term;
                phi += term / (k2 + 1.0);
                term *= delta / ((k2 + 1.0) * (k2 + 2.0));
            }
            (c, phi)
        } else if delta > 0.0 {
            let s = delta.sqrt();
            (s.cosh(), s.sinh() / s)
        } else {
            let w = (-delta).sqrt();
            (w.cos(), w.sin() / w)
        };

        let e = mu.exp();
        let centered = b.sub(&Mat2::diag(mu, mu));
        Mat2::identity().scale(c).add(&centered.scale(phi)).scale(e)
    }
}
