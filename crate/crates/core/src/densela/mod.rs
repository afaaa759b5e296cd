//! Dense symmetric linear-algebra kernels with rank-one structured updates.
//!
//! This is the only module that touches raw matrix storage. All matrices are
//! stored **row-major** in a flat `Vec<f64>` (entry `(i, j)` at `i*n_cols + j`);
//! symmetric matrices are stored full rather than packed so that the O(n²)
//! matrix-vector kernels stay cache-friendly.
//!
//! The O(n³) routines in [`factor`] (LU, QR, Jacobi eigensolver) exist for
//! one-time workspace initialization, instance generation, and verification;
//! nothing on a solver's per-iteration path calls them.

mod chol;
mod factor;
mod matrix;
pub mod mm;

pub use chol::LowerTriangular;
pub use factor::{householder_qr_q, min_eigenvalue, symmetric_eigen, LuFactors};
pub use matrix::DenseMatrix;

use crate::error::{Error, Result};

/// Sherman-Morrison update of a maintained inverse: given `Xinv = X⁻¹`,
/// overwrite it with `(X + alpha·v·vᵀ)⁻¹ = Xinv − [alpha/(1+alpha·vᵀXinv·v)]·(Xinv v)(Xinv v)ᵀ`.
///
/// O(n²). Fails with [`Error::SingularUpdate`] when the denominator
/// `1 + alpha·vᵀXinv·v` is below a scaled tolerance of `1e-14`.
pub fn rank_one_inverse_update(xinv: &mut DenseMatrix, v: &[f64], alpha: f64) -> Result<()> {
    let n = xinv.n_rows();
    if xinv.n_cols() != n || v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "inverse update: {}x{} with vector of length {}",
            xinv.n_rows(),
            xinv.n_cols(),
            v.len()
        )));
    }
    if alpha == 0.0 {
        return Ok(());
    }
    let t = xinv.matvec(v);
    let vtv: f64 = dot(v, &t);
    let denom = 1.0 + alpha * vtv;
    if denom <= 1e-14 * (1.0 + (alpha * vtv).abs()) {
        return Err(Error::SingularUpdate { denom });
    }
    xinv.add_outer(-alpha / denom, &t, &t);
    Ok(())
}

/// Plain dot product; kept here so callers share one definition.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a vector.
#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Scale a vector in place.
#[inline]
pub fn scale(v: &mut [f64], s: f64) {
    for x in v {
        *x *= s;
    }
}

/// `y += s * x`.
#[inline]
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}
