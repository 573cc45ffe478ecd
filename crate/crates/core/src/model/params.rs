use serde::{Deserialize, Serialize};

use super::Mat2;
use crate::error::{Error, Result};

/// SDE hyperparameters of the joint position/momentum diffusion.
///
/// The forward drift and diffusion blocks are
/// `F = (beta/2) * [[-gamma_cap, m_inv], [-1, -nu]]` and
/// `G = diag(sqrt(gamma_cap*beta), sqrt(M*nu*beta))`, applied per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsldParams {
    /// Noise-schedule constant beta.
    pub beta: f64,
    /// Position friction Gamma.
    pub gamma_cap: f64,
    /// Momentum friction nu.
    pub nu: f64,
    /// Inverse mass.
    pub m_inv: f64,
    /// Momentum initialization variance scale gamma: m_0 ~ N(0, gamma*M*I).
    pub gamma_init: f64,
    /// Data dimensionality d.
    pub dim: usize,
    /// Forward-time horizon T.
    pub t_max: f64,
    /// Sampling cutoff epsilon.
    pub eps_cutoff: f64,
}

impl PsldParams {
    /// Preset tuned for CIFAR-10 scale models.
    pub fn cifar10(dim: usize) -> Self {
        Self {
            beta: 8.0,
            gamma_cap: 0.01,
            nu: 4.01,
            m_inv: 4.0,
            gamma_init: 0.04,
            dim,
            t_max: 1.0,
            eps_cutoff: 1e-3,
        }
    }

    /// Preset tuned for CelebA-64 scale models.
    pub fn celeba64(dim: usize) -> Self {
        Self {
            gamma_cap: 0.005,
            nu: 4.005,
            ..Self::cifar10(dim)
        }
    }

    /// Mass M = 1 / m_inv.
    #[inline]
    pub fn mass(&self) -> f64 {
        1.0 / self.m_inv
    }

    /// Checks every invariant and returns the parameters unchanged.
    pub fn validated(self) -> Result<Self> {
        fn positive(value: f64, name: &str) -> Result<()> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be > 0")))
            }
        }
        positive(self.beta, "beta")?;
        positive(self.gamma_cap, "gamma_cap")?;
        positive(self.nu, "nu")?;
        positive(self.m_inv, "m_inv")?;
        positive(self.gamma_init, "gamma_init")?;
        positive(self.t_max, "t_max")?;
        positive(self.eps_cutoff, "eps_cutoff")?;
        if self.dim == 0 {
            return Err(Error::InvalidParams("dim must be >= 1".into()));
        }
        if self.eps_cutoff >= self.t_max {
            return Err(Error::InvalidParams("eps_cutoff < t_max violated".into()));
        }
        Ok(self)
    }

    /// Forward drift block `(beta/2) * [[-Gamma, M^-1], [-1, -nu]]`.
    pub fn drift_matrix(&self) -> Mat2 {
        Mat2::new(-self.gamma_cap, self.m_inv, -1.0, -self.nu).scale(self.beta / 2.0)
    }

    /// Forward diffusion block `diag(sqrt(Gamma*beta), sqrt(M*nu*beta))`.
    pub fn diffusion_matrix(&self) -> Mat2 {
        Mat2::diag(
            (self.gamma_cap * self.beta).sqrt(),
            (self.mass() * self.nu * self.beta).sqrt(),
        )
    }

    /// `G * G^T`, the diffusion covariance rate per dimension.
    pub fn diffusion_squared(&self) -> Mat2 {
        Mat2::diag(
            self.gamma_cap * self.beta,
            self.mass() * self.nu * self.beta,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cifar_preset_validates() {
        let p = PsldParams::cifar10(2).validated().unwrap();
        assert_eq!(p.beta, 8.0);
        assert_eq!(p.m_inv, 4.0);
        assert_eq!(p.gamma_init, 0.04);
        assert_eq!(p.eps_cutoff, 1e-3);
    }

    #[test]
    fn celeba_preset_values() {
        let p = PsldParams::celeba64(2).validated().unwrap();
        assert_eq!(p.gamma_cap, 0.005);
        assert_eq!(p.nu, 4.005);
    }

    #[test]
    fn zero_gamma_cap_is_rejected() {
        let p = PsldParams {
            gamma_cap: 0.0,
            ..PsldParams::cifar10(2)
        };
        let err = p.validated().unwrap_err().to_string();
        assert!(err.contains("gamma_cap must be > 0"), "{err}");
    }

    #[test]
    fn eps_ordering_is_rejected() {
        let p = PsldParams {
            eps_cutoff: 2.0,
            t_max: 1.0,
            ..PsldParams::cifar10(2)
        };
        let err = p.validated().unwrap_err().to_string();
        assert!(err.contains("eps_cutoff < t_max violated"), "{err}");
    }

    #[test]
    fn drift_matrix_direct_substitution() {
        // beta=2, Gamma=1, M^-1=1, nu=1 -> [[-1, 1], [-1, -1]]
        let p = PsldParams {
            beta: 2.0,
            gamma_cap: 1.0,
            nu: 1.0,
            m_inv: 1.0,
            ..PsldParams::cifar10(1)
        };
        let f = p.drift_matrix();
        assert_eq!((f.a11, f.a12, f.a21, f.a22), (-1.0, 1.0, -1.0, -1.0));

        let f = PsldParams::cifar10(1).drift_matrix();
        assert_abs_diff_eq!(f.a11, -0.04, epsilon = 1e-15);
        assert_abs_diff_eq!(f.a12, 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.a21, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.a22, -16.04, epsilon = 1e-12);
    }

    #[test]
    fn diffusion_matrix_is_diagonal_sqrt() {
        let p = PsldParams::cifar10(1);
        let g = p.diffusion_matrix();
        assert_abs_diff_eq!(g.a11, (0.01f64 * 8.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.a22, (0.25f64 * 4.01 * 8.0).sqrt(), epsilon = 1e-15);
        assert_eq!((g.a12, g.a21), (0.0, 0.0));
        let gg = p.diffusion_squared();
        assert_abs_diff_eq!(gg.a11, g.a11 * g.a11, epsilon = 1e-15);
        assert_abs_diff_eq!(gg.a22, g.a22 * g.a22, epsilon = 1e-13);
    }
}
