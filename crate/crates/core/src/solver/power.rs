//! Power-method direction selection.

use crate::densela::{dot, norm2, scale};
use crate::error::{Error, Result};
use crate::manifold::DirectionEstimate;
use crate::problems::ProblemWorkspace;
use rand::Rng;
use rand_distr::StandardNormal;

/// Dominant eigen-direction of the transformed gradient `P(X)`:
/// a Gaussian start, `r` normalized applications of
/// `y ↦ Bᵀ·(grad f(X)·(B·y))`, then the Rayleigh quotient `λ = yᵀP(X)y`
/// from one extra application (`r + 1` total, O(r·n²)).
pub fn power_method<R: Rng + ?Sized>(
    ws: &(dyn ProblemWorkspace + '_),
    r: usize,
    rng: &mut R,
) -> Result<DirectionEstimate> {
    let state = ws.state();
    power_method_operator(
        |y| state.transformed_gradient_apply(|v| ws.grad_apply(v), y),
        ws.dim(),
        r,
        rng,
    )
}

/// The same iteration against an arbitrary symmetric operator, for
/// spectrum-controlled diagnostics.
pub fn power_method_operator<R: Rng + ?Sized>(
    op: impl Fn(&[f64]) -> Vec<f64>,
    n: usize,
    r: usize,
    rng: &mut R,
) -> Result<DirectionEstimate> {
    if r < 1 {
        return Err(Error::InvalidInput("power method needs r >= 1".into()));
    }
    let mut y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    if norm2(&y) == 0.0 {
        // probability zero; resample once rather than loop
        y = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    }
    let y0_norm = norm2(&y);
    scale(&mut y, 1.0 / y0_norm);
    for _ in 0..r {
        let py = op(&y);
        let nrm = norm2(&py);
        if !(nrm > 1e-280) || !nrm.is_finite() {
            return Err(Error::ZeroOperator);
        }
        y = py;
        scale(&mut y, 1.0 / nrm);
    }
    let py = op(&y);
    let lambda = dot(&y, &py);
    if !lambda.is_finite() {
        return Err(Error::ZeroOperator);
    }
    Ok(DirectionEstimate { y, lambda })
}

/// Theory-driven iteration count `r = ⌈½·log_{1/ρ}(8n)⌉` for a known
/// spectral-gap bound `ρ = |λ⁽²⁾|/|λ⁽¹⁾| < 1`.
pub fn theory_power_iters(rho: f64, n: usize) -> usize {
    assert!(rho > 0.0 && rho < 1.0, "need 0 < rho < 1");
    let r = 0.5 * ((8.0 * n as f64).ln() / (1.0 / rho).ln());
    r.ceil() as usize
}
