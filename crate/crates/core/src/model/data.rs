use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagonal-Gaussian data distribution: `x_0 ~ N(mu0_x, diag(var0_x))`.
///
/// Momentum is initialized as `m_0 ~ N(0, gamma*M*I)` per the model
/// parameters, so the joint initial covariance block per dimension is
/// `diag(var0_x[i], gamma*M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDataSpec {
    pub mu0_x: Vec<f64>,
    pub var0_x: Vec<f64>,
}

impl GaussianDataSpec {
    pub fn new(mu0_x: Vec<f64>, var0_x: Vec<f64>) -> Result<Self> {
        let spec = Self { mu0_x, var0_x };
        spec.validate_dim(spec.mu0_x.len())?;
        Ok(spec)
    }

    /// Standard normal data in `dim` dimensions.
    pub fn standard(dim: usize) -> Self {
        Self {
            mu0_x: vec![0.0; dim],
            var0_x: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mu0_x.len()
    }

    pub fn validate_dim(&self, dim: usize) -> Result<()> {
        if self.mu0_x.len() != dim || self.var0_x.len() != dim {
            return Err(Error::InvalidParams(format!(
                "data spec dimension ({}, {}) does not match d={dim}",
                self.mu0_x.len(),
                self.var0_x.len()
            )));
        }
        if self.mu0_x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("mu0_x must be finite".into()));
        }
        if self.var0_x.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParams("var0_x entries must be > 0".into()));
        }
        Ok(())
    }
}
