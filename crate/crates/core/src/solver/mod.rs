//! The rank-one Riemannian subspace descent main loop.
//!
//! Each iteration draws a Gaussian start, runs `r` power iterations of the
//! transformed gradient `P(X) = Bᵀ·grad f(X)·B` to estimate its dominant
//! eigen-direction, picks a step size along the induced rank-one geodesic
//! (exact line search by default), and commits the O(n²) update. Residual,
//! Rayleigh-quotient, and step traces back the experiment reports.

mod power;
mod step;

pub use power::{power_method, power_method_operator, theory_power_iters};
pub use step::{clip_interval, exact_line_search, scalar_minimize_bounded, select_step};

use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::problems::{ProblemInstance, ProblemWorkspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Step-size strategy for the subspace descent loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepStrategy {
    /// Minimize the closed-form 1-D restriction `φ(α)` over the admissible
    /// interval.
    ExactLineSearch,
    /// Constant `β`: `α = exp(−λβ) − 1` each iteration.
    FixedBeta { beta: f64 },
    /// Constant literal `α` (must stay above −1).
    FixedAlpha { alpha: f64 },
    /// Backtracking on the sufficient-decrease test
    /// `φ(α(t)) <= f − beta·t·λ²` with `t ← shrink·t` from `t = init`.
    Armijo {
        beta: f64,
        shrink: f64,
        init: f64,
        max_backtracks: u32,
    },
}

impl Default for StepStrategy {
    fn default() -> Self {
        StepStrategy::ExactLineSearch
    }
}

/// Solver knobs. Defaults: 10 power iterations, exact line search, α
/// searched over `(-0.99, 10)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Power iterations per step (`r`).
    pub power_iters: usize,
    pub step: StepStrategy,
    /// Stop once `f(X) <= tol`.
    pub tol: f64,
    pub max_iters: u64,
    /// Refactor `B` (and the inverse) from `X` every this many commits;
    /// 0 disables the refresh.
    pub refresh_period: u64,
    pub rng_seed: u64,
    /// Step-size search interval `(lo, hi)`; `lo > -1` keeps the iterate off
    /// the SPD boundary, and poles of `φ` are clipped out per problem.
    pub search_interval: (f64, f64),
    /// Record every k-th iteration in the traces.
    pub trace_stride: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            power_iters: 10,
            step: StepStrategy::ExactLineSearch,
            tol: 1e-6,
            max_iters: 200_000,
            refresh_period: 1000,
            rng_seed: 0,
            search_interval: (-0.99, 10.0),
            trace_stride: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.power_iters < 1 {
            return Err(Error::InvalidInput("power_iters must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be > 0".into()));
        }
        let (lo, hi) = self.search_interval;
        if !(lo > -1.0) || !(lo < hi) {
            return Err(Error::InvalidInput(format!(
                "search interval ({lo}, {hi}) must satisfy -1 < lo < hi"
            )));
        }
        if self.trace_stride == 0 {
            return Err(Error::InvalidInput("trace_stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why a solve stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIters,
    Stalled,
}

/// Everything a solve run reports: counts, traces, timing, and the full
/// effective configuration (so any run is reproducible from its report).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub algorithm: String,
    pub iterations: u64,
    pub final_residual: f64,
    /// Initial residual `f(X₀)`.
    pub d0: f64,
    pub termination: Termination,
    /// Solve-loop wall clock divided by committed iterations; workspace
    /// initialization is excluded.
    pub seconds_per_iter: f64,
    pub trace_t: Vec<u64>,
    pub residual_trace: Vec<f64>,
    pub lambda_trace: Vec<f64>,
    pub alpha_trace: Vec<f64>,
    pub trace_seconds: Vec<f64>,
    pub config: serde_json::Value,
}

impl SolveReport {
    /// Total solve-loop seconds.
    pub fn total_seconds(&self) -> f64 {
        self.seconds_per_iter * self.iterations as f64
    }
}

/// Serialize a report as JSON (keys in a stable order) and read it back.
pub fn write_report(report: &SolveReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, report)?;
    w.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<SolveReport> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

/// Trace CSV: `t,f,lambda,alpha,cum_seconds`, one row per recorded iteration.
pub fn write_trace_csv(report: &SolveReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "t,f,lambda,alpha,cum_seconds")?;
    for i in 0..report.trace_t.len() {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e}",
            report.trace_t[i],
            report.residual_trace[i],
            report.lambda_trace[i],
            report.alpha_trace[i],
            report.trace_seconds[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Run rank-one subspace descent on `instance` from `x0`.
///
/// Initialization errors propagate; runtime stalls are reported in the
/// [`Termination`] field instead of being raised. A stall is declared after
/// two consecutive direction attempts (each with a fresh random power-method
/// start) fail to produce any decrease.
pub fn r1rsd_solve(
    instance: &ProblemInstance,
    x0: &DenseMatrix,
    config: &SolverConfig,
) -> Result<SolveReport> {
    config.validate()?;
    let mut ws = instance.init_workspace(x0)?;
    r1rsd_solve_workspace(ws.as_mut(), config)
}

/// Same loop over an already-initialized workspace.
pub fn r1rsd_solve_workspace(
    ws: &mut (dyn ProblemWorkspace + '_),
    config: &SolverConfig,
) -> Result<SolveReport> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let d0 = ws.residual_value();
    let mut trace_t = Vec::new();
    let mut residual_trace = Vec::new();
    let mut lambda_trace = Vec::new();
    let mut alpha_trace = Vec::new();
    let mut trace_seconds = Vec::new();
    let mut iterations: u64 = 0;
    let mut failures_in_a_row = 0u32;
    let started = Instant::now();
    let termination = loop {
        if ws.residual_value() <= config.tol {
            break Termination::Converged;
        }
        if iterations >= config.max_iters {
            break Termination::MaxIters;
        }
        match attempt_step(ws, config, &mut rng) {
            Ok((lambda, alpha)) => {
                failures_in_a_row = 0;
                iterations += 1;
                if iterations % config.trace_stride == 0 {
                    trace_t.push(iterations);
                    residual_trace.push(ws.residual_value());
                    lambda_trace.push(lambda);
                    alpha_trace.push(alpha);
                    trace_seconds.push(started.elapsed().as_secs_f64());
                }
                if config.refresh_period > 0 && iterations % config.refresh_period == 0 {
                    ws.refresh()?;
                }
            }
            Err(
                Error::ZeroOperator | Error::NoDecrease | Error::DegenerateDirection { .. },
            ) => {
                // retry with a fresh random power-method start; two misses
                // in a row mean the iterate is (numerically) stationary
                failures_in_a_row += 1;
                if failures_in_a_row >= 2 {
                    break if ws.residual_value() <= config.tol {
                        Termination::Converged
                    } else {
                        Termination::Stalled
                    };
                }
            }
            Err(other) => return Err(other),
        }
    };
    let elapsed = started.elapsed().as_secs_f64();
    Ok(SolveReport {
        algorithm: "r1rsd".into(),
        iterations,
        final_residual: ws.residual_value(),
        d0,
        termination,
        seconds_per_iter: if iterations > 0 {
            elapsed / iterations as f64
        } else {
            0.0
        },
        trace_t,
        residual_trace,
        lambda_trace,
        alpha_trace,
        trace_seconds,
        config: serde_json::to_value(config)?,
    })
}

/// One direction attempt: power method, step selection, commit.
/// Returns `(lambda, alpha)` on success.
fn attempt_step(
    ws: &mut (dyn ProblemWorkspace + '_),
    config: &SolverConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let dir = power_method(ws, config.power_iters, rng)?;
    // a near-zero Rayleigh quotient gives no usable descent component
    if dir.lambda.abs() <= 1e-14 * (1.0 + ws.residual_value()) {
        return Err(Error::DegenerateDirection { lambda: dir.lambda });
    }
    let alpha = select_step(ws, &dir, config)?;
    ws.commit_update(&dir, alpha)?;
    Ok((dir.lambda, alpha))
}
