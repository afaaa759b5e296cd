//! O(n³) dense factorizations: LU with partial pivoting, a cyclic Jacobi
//! symmetric eigensolver, and Householder QR.
//!
//! These serve workspace initialization, instance generation, and the dense
//! verification oracles. None of them appears on a per-iteration path.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P·A = L·U` packed in one buffer.
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.n_rows(),
                a.n_cols()
            )));
        }
        let n = a.n_rows();
        let mut lu = a.entries().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.swap(p * n + j, k * n + j);
                }
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                if m != 0.0 {
                    for j in (k + 1)..n {
                        lu[i * n + j] -= m * lu[k * n + j];
                    }
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let s = super::dot(&self.lu[i * n..i * n + i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = super::dot(&self.lu[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                out.set(i, j, col[i]);
            }
            e[j] = 0.0;
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// the columns of an orthogonal matrix. O(n³); verification and small-n
/// diagnostics only.
pub fn symmetric_eigen(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    assert!(m.is_square(), "symmetric_eigen of a non-square matrix");
    let n = m.n_rows();
    let mut a = m.clone();
    a.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frob_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a.get(i, i), i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
    let eig: Vec<f64> = pairs.iter().map(|&(l, _)| l).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for i in 0..n {
            vecs.set(i, new_col, v.get(i, old_col));
        }
    }
    (eig, vecs)
}

/// Smallest eigenvalue of a symmetric matrix (Jacobi; diagnostics only).
pub fn min_eigenvalue(m: &DenseMatrix) -> f64 {
    symmetric_eigen(m).0[0]
}

/// Orthogonal factor of a Householder QR of `a`, with the sign convention
/// `diag(R) > 0` so the result is unique. Used to draw random orthogonal
/// matrices for spectrum-controlled instance generation.
///
/// Reflectors are applied in two row-major passes (gather `s = vᵀM`, then
/// the rank-one update `M -= 2v·sᵀ`) so the O(n³) work streams through
/// cache lines instead of striding down columns.
pub fn householder_qr_q(a: &DenseMatrix) -> DenseMatrix {
    assert!(a.is_square());
    let n = a.n_rows();
    let mut r = a.clone();
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut s = vec![0.0f64; n];
    for k in 0..n {
        let mut v: Vec<f64> = (k..n).map(|i| r.get(i, k)).collect();
        let norm = super::norm2(&v);
        if norm == 0.0 {
            vs.push(vec![0.0; n - k]);
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * norm;
        let vnorm = super::norm2(&v);
        if vnorm > 0.0 {
            super::scale(&mut v, 1.0 / vnorm);
        }
        apply_reflector(&mut r, &v, k, k, &mut s);
        vs.push(v);
    }
    // accumulate Q = H_0 H_1 ... H_{n-1} applied to the identity
    let mut q = DenseMatrix::identity(n);
    for k in (0..n).rev() {
        let v = vs[k].clone();
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        apply_reflector(&mut q, &v, k, 0, &mut s);
    }
    // fix signs so diag(R) > 0: column i of Q flips when R[i][i] < 0
    for i in 0..n {
        if r.get(i, i) < 0.0 {
            for row in 0..n {
                let val = -q.get(row, i);
                q.set(row, i, val);
            }
        }
    }
    q
}

/// `M[k.., col0..] -= 2·v·(vᵀM[k.., col0..])`, row-major in both passes.
fn apply_reflector(m: &mut DenseMatrix, v: &[f64], k: usize, col0: usize, s: &mut [f64]) {
    let n = m.n_cols();
    let width = n - col0;
    let s = &mut s[..width];
    s.fill(0.0);
    for (off, &vi) in v.iter().enumerate() {
        if vi != 0.0 {
            let row = &m.row(k + off)[col0..];
            for (sj, &rij) in s.iter_mut().zip(row) {
                *sj += vi * rij;
            }
        }
    }
    for x in s.iter_mut() {
        *x *= 2.0;
    }
    for (off, &vi) in v.iter().enumerate() {
        if vi != 0.0 {
            let row = &mut m.row_mut(k + off)[col0..];
            for (rij, &sj) in row.iter_mut().zip(s.iter()) {
                *rij -= vi * sj;
            }
        }
    }
}
