//! Lower-triangular Cholesky factors and their rank-one update/downdate.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `B` of an SPD matrix, `X = B·Bᵀ`.
///
/// Stored as a full row-major `n×n` buffer with the strict upper part kept
/// identically zero; diagonal entries are strictly positive.
#[derive(Clone, Debug)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    /// Factor a symmetric positive definite matrix.
    ///
    /// The input is symmetrized as `(X + Xᵀ)/2` before factorization since
    /// rank-one recursions accumulate asymmetry at machine precision.
    /// Fails with [`Error::NotPositiveDefinite`] on a non-positive pivot.
    pub fn cholesky(x: &DenseMatrix) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cholesky of a {}x{} matrix",
                x.n_rows(),
                x.n_cols()
            )));
        }
        let n = x.n_rows();
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                // defensive symmetrization, applied entrywise
                let a_ij = 0.5 * (x.get(i, j) + x.get(j, i));
                let mut s = a_ij;
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { index: i, pivot: s });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(LowerTriangular { n, data: l })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        LowerTriangular { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// `B·y`; only the lower triangle is read.
    pub fn matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|i| super::dot(&self.data[i * n..i * n + i + 1], &y[..i + 1]))
            .collect()
    }

    /// `Bᵀ·w` without forming the transpose.
    pub fn matvec_transpose(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n);
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let wi = w[i];
            if wi != 0.0 {
                super::axpy(&mut out[..i + 1], wi, &self.data[i * n..i * n + i + 1]);
            }
        }
        out
    }

    /// Solve `B·x = v` (forward substitution) or `Bᵀ·x = v` (back
    /// substitution) in O(n²).
    pub fn solve(&self, v: &[f64], transposed: bool) -> Vec<f64> {
        assert_eq!(
            v.len(),
            self.n,
            "tri_solve: dimension {} with vector of length {}",
            self.n,
            v.len()
        );
        let n = self.n;
        if !transposed {
            let mut x = vec![0.0; n];
            for i in 0..n {
                let s = super::dot(&self.data[i * n..i * n + i], &x[..i]);
                x[i] = (v[i] - s) / self.data[i * n + i];
            }
            x
        } else {
            // Bᵀx = v: solve from the last unknown, pushing updates through
            // the rows of B so access stays row-major.
            let mut acc = v.to_vec();
            for i in (0..n).rev() {
                let xi = acc[i] / self.data[i * n + i];
                acc[i] = xi;
                if xi != 0.0 {
                    let row = &self.data[i * n..i * n + i];
                    for j in 0..i {
                        acc[j] -= row[j] * xi;
                    }
                }
            }
            acc
        }
    }

    /// Rank-one update of the factor: replace `B` with `B'` such that
    /// `B'·B'ᵀ = B·Bᵀ + alpha·v·vᵀ`, in O(n²).
    ///
    /// For `alpha < 0` this is a downdate; it fails with
    /// [`Error::DowndateBreaksPD`] exactly when `1 + alpha·|B⁻¹v|² <= 0`,
    /// i.e. when the updated matrix leaves the SPD cone.
    pub fn rank_one_update(&mut self, v: &[f64], alpha: f64) -> Result<()> {
        assert_eq!(v.len(), self.n);
        if alpha == 0.0 {
            return Ok(());
        }
        let n = self.n;
        if alpha < 0.0 {
            let p = self.solve(v, false);
            let margin = 1.0 + alpha * super::dot(&p, &p);
            if margin <= 0.0 {
                return Err(Error::DowndateBreaksPD { margin });
            }
        }
        let sign = if alpha > 0.0 { 1.0 } else { -1.0 };
        let root = alpha.abs().sqrt();
        let mut w: Vec<f64> = v.iter().map(|x| x * root).collect();
        // LINPACK-style dchud/dchdd sweep: one plane rotation per column.
        for k in 0..n {
            let lkk = self.data[k * n + k];
            let wk = w[k];
            let arg = lkk * lkk + sign * wk * wk;
            if !(arg > 0.0) {
                return Err(Error::DowndateBreaksPD { margin: arg });
            }
            let r = arg.sqrt();
            let c = r / lkk;
            let s = wk / lkk;
            self.data[k * n + k] = r;
            for i in (k + 1)..n {
                let lik = (self.data[i * n + k] + sign * s * w[i]) / c;
                self.data[i * n + k] = lik;
                w[i] = c * w[i] - s * lik;
            }
        }
        Ok(())
    }

    /// Margin `1 + alpha·|B⁻¹v|²` of a prospective rank-one modification;
    /// positive iff `B·Bᵀ + alpha·v·vᵀ` stays SPD.
    pub fn update_margin(&self, v: &[f64], alpha: f64) -> f64 {
        let p = self.solve(v, false);
        1.0 + alpha * super::dot(&p, &p)
    }

    /// The factor as a dense matrix (upper part zero).
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_row_major(self.n, self.n, self.data.clone()).expect("square buffer")
    }

    /// Reconstruct `B·Bᵀ`; O(n³), for verification.
    pub fn reconstruct(&self) -> DenseMatrix {
        let b = self.to_dense();
        b.matmul(&b.transpose())
    }

    /// `X⁻¹ = B⁻ᵀ·B⁻¹` built column by column; O(n³), initialization only.
    pub fn inverse_spd(&self) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let w = self.solve(&e, false);
            let col = self.solve(&w, true);
            for i in 0..n {
                out.set(i, j, col[i]);
            }
            e[j] = 0.0;
        }
        // exact symmetry, which the Sherman-Morrison recursion then preserves
        out.symmetrize();
        out
    }
}
