use crate::error::{Error, Result};

/// A batch of position/momentum chains at one forward time.
///
/// Positions and momenta are stored row-major as `[n_chains x dim]` flats;
/// entry `(chain, d)` lives at index `chain * dim + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    x: Vec<f64>,
    m: Vec<f64>,
    n_chains: usize,
    dim: usize,
    /// Current forward time in `[0, T]`.
    pub t: f64,
}

impl JointState {
    pub fn new(x: Vec<f64>, m: Vec<f64>, n_chains: usize, dim: usize, t: f64) -> Result<Self> {
        if x.len() != n_chains * dim || m.len() != n_chains * dim {
            return Err(Error::ShapeMismatch(format!(
                "state arrays must be n_chains*dim = {} long, got x={}, m={}",
                n_chains * dim,
                x.len(),
                m.len()
            )));
        }
        let state = Self { x, m, n_chains, dim, t };
        state.check_finite()?;
        Ok(state)
    }

    pub fn zeros(n_chains: usize, dim: usize, t: f64) -> Self {
        Self {
            x: vec![0.0; n_chains * dim],
            m: vec![0.0; n_chains * dim],
            n_chains,
            dim,
            t,
        }
    }

    #[inline]
    pub fn n_chains(&self) -> usize {
        self.n_chains
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn m(&self) -> &[f64] {
        &self.m
    }

    #[inline]
    pub fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    #[inline]
    pub fn m_mut(&mut self) -> &mut [f64] {
        &mut self.m
    }

    /// Mutable views of both arrays at once.
    #[inline]
    pub fn xm_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.x, &mut self.m)
    }

    #[inline]
    pub fn idx(&self, chain: usize, d: usize) -> usize {
        chain * self.dim + d
    }

    /// NaN or Inf anywhere is a hard error.
    pub fn check_finite(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::ShapeMismatch("state time is not finite".into()));
        }
        let bad_x = self.x.iter().any(|v| !v.is_finite());
        let bad_m = self.m.iter().any(|v| !v.is_finite());
        if bad_x || bad_m {
            return Err(Error::ShapeMismatch(
                "state contains non-finite entries".into(),
            ));
        }
        Ok(())
    }
}

/// Score components returned by a provider for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreEval {
    /// Position component, `[n_chains x dim]` row-major.
    pub sx: Vec<f64>,
    /// Momentum component, same layout.
    pub sm: Vec<f64>,
    pub n_chains: usize,
    pub dim: usize,
    /// Forward-time conditioning value the provider was called with.
    pub t_cond: f64,
}

impl ScoreEval {
    pub fn zeros_like(state: &JointState, t_cond: f64) -> Self {
        Self {
            sx: vec![0.0; state.n_chains() * state.dim()],
            sm: vec![0.0; state.n_chains() * state.dim()],
            n_chains: state.n_chains(),
            dim: state.dim(),
            t_cond,
        }
    }

    /// Validates this evaluation against the state it was produced for.
    pub fn check_against(&self, state: &JointState) -> Result<()> {
        if self.n_chains != state.n_chains()
            || self.dim != state.dim()
            || self.sx.len() != self.n_chains * self.dim
            || self.sm.len() != self.n_chains * self.dim
        {
            return Err(Error::ShapeMismatch(format!(
                "score shape ({}, {}) does not match state ({}, {})",
                self.n_chains,
                self.dim,
                state.n_chains(),
                state.dim()
            )));
        }
        if self.sx.iter().chain(self.sm.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Provider("score contains non-finite entries".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_shape_mismatch() {
        assert!(JointState::new(vec![0.0; 4], vec![0.0; 3], 2, 2, 0.5).is_err());
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(JointState::new(vec![0.0, f64::NAN], vec![0.0, 0.0], 1, 2, 0.5).is_err());
        assert!(JointState::new(vec![0.0, f64::INFINITY], vec![0.0, 0.0], 1, 2, 0.5).is_err());
    }
}
