//! Step-size selection: bounded scalar minimization plus the per-strategy
//! dispatch.

use super::{SolverConfig, StepStrategy};
use crate::error::{Error, Result};
use crate::manifold::{beta_step_to_alpha, DirectionEstimate};
use crate::problems::{LineObjective, ProblemWorkspace};

const GRID_POINTS: usize = 2048;
const GOLDEN_WIDTH: f64 = 1e-10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Global minimizer of `phi` on `[lo, hi]` to grid-plus-golden-section
/// accuracy: a 2048-interval scan locates the best bracket, golden-section
/// refines it to width `1e-10`. Non-finite values are treated as +inf, and a
/// boundary minimizer is a valid return.
pub fn scalar_minimize_bounded(phi: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    assert!(lo < hi, "scalar_minimize_bounded: empty interval");
    let guarded = |x: f64| {
        let v = phi(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let step = (hi - lo) / GRID_POINTS as f64;
    let mut best_x = lo;
    let mut best_v = f64::INFINITY;
    for i in 0..=GRID_POINTS {
        let x = if i == GRID_POINTS {
            hi
        } else {
            lo + step * i as f64
        };
        let v = guarded(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    // refine inside the bracket around the best grid point
    let mut a = (best_x - step).max(lo);
    let mut b = (best_x + step).min(hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = guarded(c);
    let mut fd = guarded(d);
    while b - a > GOLDEN_WIDTH {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = guarded(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = guarded(d);
        }
        if fc < best_v {
            best_v = fc;
            best_x = c;
        }
        if fd < best_v {
            best_v = fd;
            best_x = d;
        }
    }
    best_x
}

/// Clip `(lo, hi)` against the poles of `φ`, keeping the component that
/// contains `α = 0`. Fails when a pole leaves no admissible interval
/// around 0.
pub fn clip_interval(interval: (f64, f64), poles: &[f64]) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = interval;
    for &p in poles {
        if p <= lo || p >= hi {
            continue;
        }
        let margin = 1e-6 * (1.0 + p.abs());
        if p < 0.0 {
            lo = lo.max(p + margin);
        } else {
            hi = hi.min(p - margin);
        }
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::PoleInObjective { pole: p });
        }
    }
    Ok((lo, hi))
}

/// Pick the step size `α` for the current direction under the configured
/// strategy. Exact line search additionally cross-checks the closed-form
/// stationary points (the derivative cubic of the CARE quartic) against the
/// grid/golden-section result, and reports [`Error::NoDecrease`] when the
/// best admissible step does not strictly decrease `φ(0)`.
pub fn select_step(
    ws: &(dyn ProblemWorkspace + '_),
    dir: &DirectionEstimate,
    config: &SolverConfig,
) -> Result<f64> {
    match &config.step {
        StepStrategy::ExactLineSearch => {
            let obj = ws.line_search_objective(dir);
            exact_line_search(&obj, config.search_interval)
        }
        StepStrategy::FixedBeta { beta } => Ok(beta_step_to_alpha(dir.lambda, *beta)),
        StepStrategy::FixedAlpha { alpha } => Ok(*alpha),
        StepStrategy::Armijo {
            beta,
            shrink,
            init,
            max_backtracks,
        } => {
            let obj = ws.line_search_objective(dir);
            let f0 = obj.eval(0.0);
            let lam_sq = dir.lambda * dir.lambda;
            let mut t = *init;
            for _ in 0..*max_backtracks {
                let alpha = beta_step_to_alpha(dir.lambda, t);
                let v = obj.eval(alpha);
                if v.is_finite() && v <= f0 - beta * t * lam_sq {
                    return Ok(alpha);
                }
                t *= shrink;
            }
            Err(Error::NoDecrease)
        }
    }
}

/// Exact line search over a pole-clipped interval. `α = 0` is always a
/// candidate, so at a minimizer of `φ` this returns 0 rather than erroring;
/// [`Error::NoDecrease`] fires only when even the best candidate exceeds
/// `φ(0)` beyond roundoff.
pub fn exact_line_search(obj: &LineObjective, interval: (f64, f64)) -> Result<f64> {
    let (lo, hi) = clip_interval(interval, &obj.poles())?;
    let guarded = |x: f64| {
        let v = obj.eval(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let f0 = obj.eval(0.0);
    let mut best_x = 0.0;
    let mut best_v = f0;
    let grid_x = scalar_minimize_bounded(|x| obj.eval(x), lo, hi);
    for cand in [grid_x, lo, hi]
        .into_iter()
        .chain(obj.stationary_points())
    {
        if (lo..=hi).contains(&cand) {
            let v = guarded(cand);
            if v < best_v {
                best_v = v;
                best_x = cand;
            }
        }
    }
    if best_v > f0 * (1.0 + 1e-12) {
        return Err(Error::NoDecrease);
    }
    Ok(best_x)
}
