use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{analytic_score, GaussianDataSpec, JointState, PsldParams, ScoreEval};
use crate::error::{Error, Result};

/// Source of score evaluations `s(z, t) = (s^x, s^m)`.
///
/// One `evaluate` call scores the whole batch; samplers count calls, not
/// chains, when accounting for evaluation cost.
pub trait ScoreProvider {
    fn evaluate(&mut self, state: &JointState, t_cond: f64) -> Result<ScoreEval>;
}

/// Per-run mutable context; owns the evaluation counter.
#[derive(Debug, Default, Clone)]
pub struct RunContext {
    /// Number of score-provider calls so far.
    pub nfe: u64,
}

impl RunContext {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Calls the provider once for the batch, enforces the shape/finiteness
/// contract, and bumps the context's evaluation counter by exactly one.
pub fn score_provider_call(
    ctx: &mut RunContext,
    provider: &mut dyn ScoreProvider,
    state: &JointState,
    t_cond: f64,
) -> Result<ScoreEval> {
    let eval = provider.evaluate(state, t_cond)?;
    eval.check_against(state)?;
    if eval.t_cond != t_cond {
        return Err(Error::Provider(format!(
            "provider recorded t_cond={} for a call conditioned at {}",
            eval.t_cond, t_cond
        )));
    }
    ctx.nfe += 1;
    Ok(eval)
}

/// In-process provider backed by the exact Gaussian score.
#[derive(Debug, Clone)]
pub struct GaussianScoreOracle {
    pub params: PsldParams,
    pub data: GaussianDataSpec,
}

impl GaussianScoreOracle {
    pub fn new(params: PsldParams, data: GaussianDataSpec) -> Self {
        Self { params, data }
    }
}

impl ScoreProvider for GaussianScoreOracle {
    fn evaluate(&mut self, state: &JointState, t_cond: f64) -> Result<ScoreEval> {
        analytic_score(&self.params, &self.data, state, t_cond)
    }
}

/// Provider returning identically zero scores; isolates the linear part of
/// every update.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroScoreProvider;

impl ScoreProvider for ZeroScoreProvider {
    fn evaluate(&mut self, state: &JointState, t_cond: f64) -> Result<ScoreEval> {
        Ok(ScoreEval::zeros_like(state, t_cond))
    }
}

/// Counts raw `evaluate` invocations; independent of the run context's
/// bookkeeping.
pub struct CountingProvider<P> {
    inner: P,
    calls: u64,
}

impl<P> CountingProvider<P> {
    pub fn new(inner: P) -> Self {
        Self { inner, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }
}

impl<P: ScoreProvider> ScoreProvider for CountingProvider<P> {
    fn evaluate(&mut self, state: &JointState, t_cond: f64) -> Result<ScoreEval> {
        self.calls += 1;
        self.inner.evaluate(state, t_cond)
    }
}

/// Records the conditioning time of every call.
pub struct RecordingProvider<P> {
    inner: P,
    t_conds: Vec<f64>,
}

impl<P> RecordingProvider<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            t_conds: Vec::new(),
        }
    }

    pub fn t_conds(&self) -> &[f64] {
        &self.t_conds
    }
}

impl<P: ScoreProvider> ScoreProvider for RecordingProvider<P> {
    fn evaluate(&mut self, state: &JointState, t_cond: f64) -> Result<ScoreEval> {
        self.t_conds.push(t_cond);
        self.inner.evaluate(state, t_cond)
    }
}

/// Replays the latest fresh evaluation on all but every `period`-th call.
///
/// With `period = 2`, calls 0, 2, 4, ... are forwarded and calls 1, 3, ...
/// return a copy of the previous result (with the requested `t_cond`
/// stamped), which turns a two-evaluation naive step into a score-sharing
/// one.
pub struct ReplayProvider<P> {
    inner: P,
    period: u64,
    calls: u64,
    last: Option<ScoreEval>,
}

impl<P> ReplayProvider<P> {
    pub fn new(inner: P, period: u64) -> Self {
        assert!(period >= 1);
        Self {
            inner,
            period,
            calls: 0,
            last: None,
        }
    }
}

impl<P: ScoreProvider> ScoreProvider for ReplayProvider<P> {
    fn evaluate(&mut self, state: &JointState, t_cond: f64) -> Result<ScoreEval> {
        let fresh = self.calls % self.period == 0;
        self.calls += 1;
        if fresh || self.last.is_none() {
            let eval = self.inner.evaluate(state, t_cond)?;
            self.last = Some(eval.clone());
            Ok(eval)
        } else {
            let mut eval = self.last.clone().expect("checked above");
            eval.t_cond = t_cond;
            Ok(eval)
        }
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    t: f64,
    x: &'a [Vec<f64>],
    m: &'a [Vec<f64>],
}

#[derive(Deserialize)]
struct ScoreResponse {
    sx: Vec<Vec<f64>>,
    sm: Vec<Vec<f64>>,
}

/// Score provider running in a child process.
///
/// Protocol: newline-delimited JSON over the child's stdin/stdout. Request
/// `{"t": .., "x": [[..]], "m": [[..]]}`; response `{"sx": [[..]], "sm":
/// [[..]]}`. One request per evaluation, answered in order.
pub struct ExternalProvider {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    command: String,
}

impl ExternalProvider {
    /// Spawns `command` (split on whitespace; no shell quoting).
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::Provider("empty provider command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Provider(format!("failed to spawn `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");

        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        Ok(Self {
            child,
            stdin,
            lines: rx,
            timeout,
            command: command.to_string(),
        })
    }

    fn rows(flat: &[f64], n: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..n).map(|c| flat[c * dim..(c + 1) * dim].to_vec()).collect()
    }

    fn flatten(rows: Vec<Vec<f64>>, n: usize, dim: usize, what: &str) -> Result<Vec<f64>> {
        if rows.len() != n {
            return Err(Error::Provider(format!(
                "{what} has {} rows, expected {n}",
                rows.len()
            )));
        }
        let mut flat = Vec::with_capacity(n * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Provider(format!(
                    "{what} row has {} entries, expected {dim}",
                    row.len()
                )));
            }
            flat.extend_from_slice(&row);
        }
        Ok(flat)
    }
}

impl ScoreProvider for ExternalProvider {
    fn evaluate(&mut self, state: &JointState, t_cond: f64) -> Result<ScoreEval> {
        let n = state.n_chains();
        let dim = state.dim();
        let request = ScoreRequest {
            t: t_cond,
            x: &Self::rows(state.x(), n, dim),
            m: &Self::rows(state.m(), n, dim),
        };
        let mut line = serde_json::to_string(&request)
            .map_err(|e| Error::Provider(format!("request encoding failed: {e}")))?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Provider(format!("`{}`: write failed: {e}", self.command)))?;

        let reply = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                return Err(Error::Provider(format!(
                    "`{}`: read failed: {e}",
                    self.command
                )))
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                return Err(Error::Provider(format!(
                    "`{}`: timed out after {:?}",
                    self.command, self.timeout
                )))
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                return Err(Error::Provider(format!(
                    "`{}`: provider closed its output",
                    self.command
                )))
            }
        };
        let response: ScoreResponse = serde_json::from_str(&reply)
            .map_err(|e| Error::Provider(format!("`{}`: bad response: {e}", self.command)))?;
        Ok(ScoreEval {
            sx: Self::flatten(response.sx, n, dim, "sx")?,
            sm: Self::flatten(response.sm, n, dim, "sm")?,
            n_chains: n,
            dim,
            t_cond,
        })
    }
}

impl Drop for ExternalProvider {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
