//! The SPD-manifold iterate and its rank-one geodesic update.
//!
//! A step along the dominant eigen-component of the transformed gradient
//! `P(X) = Bᵀ·grad f(X)·B` (with `B` the Cholesky factor of `X`) is the
//! geodesic `X ← B·exp(-λβ·yyᵀ)·Bᵀ`. Because `exp(c·yyᵀ) = I + (eᶜ-1)·yyᵀ`
//! for unit `y`, the step collapses to the rank-one form
//! `X ← X + α·(By)(By)ᵀ` with `α = exp(-λβ) - 1 > -1`, and everything the
//! solver maintains (`X`, its factor, its inverse) follows by O(n²) rank-one
//! updates.

use crate::densela::{DenseMatrix, LowerTriangular};
use crate::error::{Error, Result};

/// Unit direction `y` and approximate Rayleigh quotient `λ = yᵀP(X)y`
/// produced by the power method.
#[derive(Clone, Debug)]
pub struct DirectionEstimate {
    pub y: Vec<f64>,
    pub lambda: f64,
}

/// The solver iterate: `X` (SPD), its lower Cholesky factor `B`, and,
/// when the active problem applies `X⁻¹`, the maintained inverse.
///
/// Single-owner mutable during a solve; all three pieces advance together
/// through [`SpdState::geodesic_update`].
#[derive(Clone, Debug)]
pub struct SpdState {
    x: DenseMatrix,
    b: LowerTriangular,
    xinv: Option<DenseMatrix>,
}

impl SpdState {
    /// Factor `x0` (symmetrizing defensively) and, if requested, build the
    /// inverse. O(n³), once per solve.
    pub fn new(x0: &DenseMatrix, with_inverse: bool) -> Result<Self> {
        if !x0.all_finite() {
            return Err(Error::NonFinite("initial iterate".into()));
        }
        let mut x = x0.clone();
        x.symmetrize();
        let b = LowerTriangular::cholesky(&x)?;
        let xinv = if with_inverse {
            Some(b.inverse_spd())
        } else {
            None
        };
        Ok(SpdState { x, b, xinv })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.b.n()
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn b(&self) -> &LowerTriangular {
        &self.b
    }

    pub fn xinv(&self) -> Option<&DenseMatrix> {
        self.xinv.as_ref()
    }

    /// `X⁻¹·v` through the factor (two triangular solves); used when the
    /// inverse is not maintained.
    pub fn solve_spd(&self, v: &[f64]) -> Vec<f64> {
        let w = self.b.solve(v, false);
        self.b.solve(&w, true)
    }

    /// One application of the transformed gradient: `Bᵀ·(grad f(X)·(B·y))`,
    /// as the three-stage pipeline `v = B·y`, `w = grad_apply(v)`,
    /// `out = Bᵀ·w`. O(n²) given an O(n²) `grad_apply`.
    pub fn transformed_gradient_apply<F>(&self, grad_apply: F, y: &[f64]) -> Vec<f64>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let v = self.b.matvec(y);
        let w = grad_apply(&v);
        self.b.matvec_transpose(&w)
    }

    /// Rank-one geodesic step `X ← X + α·(By)(By)ᵀ` for a unit direction
    /// `y`, advancing `X`, `B`, and (when maintained) `X⁻¹`, all in O(n²).
    ///
    /// Requires `alpha > -1`; since `‖y‖ = 1` implies `vᵀX⁻¹v = 1` for
    /// `v = By`, that bound is exactly the SPD-preservation condition.
    /// Returns `v = By`.
    pub fn geodesic_update(&mut self, y: &[f64], alpha: f64) -> Result<Vec<f64>> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::InadmissibleStep { alpha });
        }
        let v = self.b.matvec(y);
        if alpha == 0.0 {
            return Ok(v);
        }
        // z = B⁻ᵀy must come from the pre-update factor
        let z = if self.xinv.is_some() {
            Some(self.b.solve(y, true))
        } else {
            None
        };
        self.x.add_outer(alpha, &v, &v);
        self.b.rank_one_update(&v, alpha)?;
        if let (Some(xinv), Some(z)) = (self.xinv.as_mut(), z) {
            // Sherman-Morrison collapses to X⁻¹ += -α/(1+α)·zzᵀ because
            // vᵀX⁻¹v = yᵀy = 1.
            let mu = -alpha / (1.0 + alpha);
            xinv.add_outer(mu, &z, &z);
        }
        Ok(v)
    }

    /// Refactor `B` (and the inverse, if maintained) directly from `X`.
    /// O(n³); bounds floating-point drift when called every K iterations.
    pub fn refresh(&mut self) -> Result<()> {
        self.x.symmetrize();
        self.b = LowerTriangular::cholesky(&self.x)?;
        if self.xinv.is_some() {
            self.xinv = Some(self.b.inverse_spd());
        }
        Ok(())
    }

    /// Drift invariants: `‖BBᵀ - X‖_F <= tol·‖X‖_F` and, when maintained,
    /// `‖X·X⁻¹ - I‖_F <= tol·√n`. Verification mode only (O(n³)).
    pub fn verify(&self, tol: f64) -> Result<()> {
        let n = self.n();
        let mut recon = self.b.reconstruct();
        recon.add_scaled(-1.0, &self.x);
        let err = recon.frob_norm();
        if err > tol * self.x.frob_norm().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidInput(format!(
                "cholesky factor drift {err:e} exceeds {tol:e}*|X|"
            )));
        }
        if let Some(xinv) = &self.xinv {
            let prod = self.x.matmul(xinv);
            let mut diff = prod;
            diff.add_scaled(-1.0, &DenseMatrix::identity(n));
            let e = diff.frob_norm();
            if e > tol * (n as f64).sqrt() {
                return Err(Error::InvalidInput(format!(
                    "inverse drift {e:e} exceeds {tol:e}*sqrt(n)"
                )));
            }
        }
        Ok(())
    }
}

/// `α = exp(-λβ) - 1`: the step-size reparametrization that turns the
/// geodesic exponent into the rank-one coefficient.
#[inline]
pub fn beta_step_to_alpha(lambda: f64, beta: f64) -> f64 {
    (-lambda * beta).exp() - 1.0
}

/// `‖Bᵀ·grad_dense·B‖_F = sqrt(Σᵢ λ⁽ⁱ⁾²)`: the Riemannian gradient norm
/// under the affine-invariant metric. O(n³) diagnostic for small n.
pub fn dense_riemannian_grad_norm(state: &SpdState, grad_dense: &DenseMatrix) -> f64 {
    let b = state.b().to_dense();
    let p = b.matmul_transpose_left(&grad_dense.matmul(&b));
    p.frob_norm()
}
