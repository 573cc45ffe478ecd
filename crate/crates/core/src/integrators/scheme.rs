use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampler scheme: plain Euler-Maruyama or one of the splitting compositions.
///
/// Naive schemes evaluate the score fresh for every Euler sub-step; reduced
/// schemes share the first evaluation between the consecutive momentum and
/// position updates, shift the conditioning of a trailing half-step to the
/// step's end time, and accept a noise-level control in the position space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    Em,
    Noba,
    Nbao,
    Nobab,
    Roba,
    Rbao,
    Robab,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Em,
        Scheme::Noba,
        Scheme::Nbao,
        Scheme::Nobab,
        Scheme::Roba,
        Scheme::Rbao,
        Scheme::Robab,
    ];

    pub fn is_reduced(self) -> bool {
        matches!(self, Scheme::Roba | Scheme::Rbao | Scheme::Robab)
    }

    /// Score evaluations consumed by one composed step.
    pub fn nfe_per_step(self) -> u64 {
        match self {
            Scheme::Em => 1,
            Scheme::Noba => 2,
            Scheme::Nbao => 2,
            Scheme::Nobab => 3,
            Scheme::Roba => 1,
            Scheme::Rbao => 1,
            Scheme::Robab => 2,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Scheme::Em => "EM",
            Scheme::Noba => "NOBA",
            Scheme::Nbao => "NBAO",
            Scheme::Nobab => "NOBAB",
            Scheme::Roba => "ROBA",
            Scheme::Rbao => "RBAO",
            Scheme::Robab => "ROBAB",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EM" => Ok(Scheme::Em),
            "NOBA" => Ok(Scheme::Noba),
            "NBAO" => Ok(Scheme::Nbao),
            "NOBAB" => Ok(Scheme::Nobab),
            "ROBA" => Ok(Scheme::Roba),
            "RBAO" => Ok(Scheme::Rbao),
            "ROBAB" => Ok(Scheme::Robab),
            other => Err(Error::Scheme(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A scheme plus its noise-control and denoising options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    /// Position-space noise level; absent means the exact-OU noise amount.
    /// Only reduced schemes accept it.
    pub lambda_s: Option<f64>,
    /// Append the final Euler update from the cutoff to time zero.
    pub denoise_last: bool,
}

impl SchemeSpec {
    pub fn new(scheme: Scheme, lambda_s: Option<f64>, denoise_last: bool) -> Result<Self> {
        let spec = Self {
            scheme,
            lambda_s,
            denoise_last,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda_s {
            if !self.scheme.is_reduced() {
                return Err(Error::Scheme(format!(
                    "lambda_s is only valid for reduced schemes, got {} with lambda_s={l}",
                    self.scheme
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Scheme(format!("lambda_s must be > 0, got {l}")));
            }
        }
        Ok(())
    }
}

/// Forward-time value a score evaluation is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cond {
    /// `T - t`, the forward time at the start of the composed step.
    StepStart,
    /// `T - (t + h)`, the forward time at the end of the composed step.
    StepEnd,
}

/// One sub-operation of a composed update step.
///
/// `eval` indexes the score evaluations made so far within this step, in
/// order. Both the numerical sampler and the mean-expansion machinery
/// interpret the same tables, so the two can never drift apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SubStep {
    /// Exact OU solution over the step (noise-level control applies here).
    Ou,
    /// Score evaluation at the current state.
    Eval { cond: Cond },
    /// Euler momentum update; `frac` is the step-size fraction (1 or 1/2).
    B { frac: f64, eval: usize },
    /// Euler position update over the full step.
    A { eval: usize },
    /// One Euler-Maruyama update of the full reverse SDE.
    EulerMaruyama { eval: usize },
}

pub(crate) fn composition(scheme: Scheme) -> &'static [SubStep] {
    use Cond::*;
    use SubStep::*;
    match scheme {
        Scheme::Em => &[Eval { cond: StepStart }, EulerMaruyama { eval: 0 }],
        Scheme::Noba => &[
            Ou,
            Eval { cond: StepStart },
            B { frac: 1.0, eval: 0 },
            Eval { cond: StepStart },
            A { eval: 1 },
        ],
        Scheme::Nbao => &[
            Eval { cond: StepStart },
            B { frac: 1.0, eval: 0 },
            Eval { cond: StepStart },
            A { eval: 1 },
            Ou,
        ],
        Scheme::Nobab => &[
            Ou,
            Eval { cond: StepStart },
            B { frac: 0.5, eval: 0 },
            Eval { cond: StepStart },
            A { eval: 1 },
            Eval { cond: StepStart },
            B { frac: 0.5, eval: 2 },
        ],
        Scheme::Roba => &[
            Ou,
            Eval { cond: StepStart },
            B { frac: 1.0, eval: 0 },
            A { eval: 0 },
        ],
        Scheme::Rbao => &[
            Eval { cond: StepStart },
            B { frac: 1.0, eval: 0 },
            A { eval: 0 },
            Ou,
        ],
        Scheme::Robab => &[
            Ou,
            Eval { cond: StepStart },
            B { frac: 0.5, eval: 0 },
            A { eval: 0 },
            Eval { cond: StepEnd },
            B { frac: 0.5, eval: 1 },
        ],
    }
}
