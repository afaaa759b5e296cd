//! Row-major dense matrix storage and the O(n²) kernels built on it.

use crate::error::{Error, Result};

/// Dense matrix, row-major: entry `(i, j)` lives at `data[i * n_cols + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

/// Row count threshold above which the O(n³) `matmul` parallelizes over rows.
const PAR_MATMUL_MIN: usize = 128;

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from a closure over `(row, col)`.
    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m.data[i * n_cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        DenseMatrix {
            n_rows,
            n_cols,
            data,
        }
    }

    /// Take ownership of a row-major buffer.
    pub fn from_row_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "buffer of length {} for a {}x{} matrix",
                data.len(),
                n_rows,
                n_cols
            )));
        }
        Ok(DenseMatrix {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in entries.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Column `j` gathered into a fresh vector.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `M·v`, computed row by row; O(n_rows · n_cols).
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(
            v.len(),
            self.n_cols,
            "matvec: {}x{} with vector of length {}",
            self.n_rows,
            self.n_cols,
            v.len()
        );
        (0..self.n_rows)
            .map(|i| super::dot(self.row(i), v))
            .collect()
    }

    /// `Mᵀ·v` without forming the transpose.
    pub fn matvec_transpose(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(
            v.len(),
            self.n_rows,
            "matvec_transpose: {}x{} with vector of length {}",
            self.n_rows,
            self.n_cols,
            v.len()
        );
        let mut out = vec![0.0; self.n_cols];
        for i in 0..self.n_rows {
            let vi = v[i];
            if vi != 0.0 {
                super::axpy(&mut out, vi, self.row(i));
            }
        }
        out
    }

    /// Rank-one accumulation `M += alpha · u·vᵀ`; the workhorse of every
    /// maintained intermediate.
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) {
        assert_eq!(u.len(), self.n_rows);
        assert_eq!(v.len(), self.n_cols);
        if alpha == 0.0 {
            return;
        }
        let nc = self.n_cols;
        for i in 0..self.n_rows {
            let s = alpha * u[i];
            if s != 0.0 {
                let row = &mut self.data[i * nc..(i + 1) * nc];
                super::axpy(row, s, v);
            }
        }
    }

    /// `self += s * other`, entrywise.
    pub fn add_scaled(&mut self, s: f64, other: &DenseMatrix) {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for a in &mut self.data {
            *a *= s;
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out.data[j * self.n_rows + i] = self.data[i * self.n_cols + j];
            }
        }
        out
    }

    /// Dense product `self · rhs`; O(n³), kept off every per-iteration path.
    /// Rows are computed independently (ikj order) and in parallel for large
    /// matrices, which keeps results bit-identical to the sequential loop.
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.n_cols, rhs.n_rows,
            "matmul: {}x{} by {}x{}",
            self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols
        );
        let m = self.n_rows;
        let k = self.n_cols;
        let n = rhs.n_cols;
        let mut out = DenseMatrix::zeros(m, n);
        let body = |i: usize, out_row: &mut [f64]| {
            let a_row = self.row(i);
            for (p, &aip) in a_row.iter().enumerate().take(k) {
                if aip != 0.0 {
                    super::axpy(out_row, aip, rhs.row(p));
                }
            }
        };
        if m >= PAR_MATMUL_MIN {
            use rayon::prelude::*;
            out.data
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, r)| body(i, r));
        } else {
            out.data
                .chunks_mut(n)
                .enumerate()
                .for_each(|(i, r)| body(i, r));
        }
        out
    }

    /// `selfᵀ · rhs` without materializing the transpose.
    pub fn matmul_transpose_left(&self, rhs: &DenseMatrix) -> DenseMatrix {
        self.transpose().matmul(rhs)
    }

    /// Sum of squared entries (squared Frobenius norm).
    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    /// Replace `self` with `(self + selfᵀ)/2`. Rank-one recursions accumulate
    /// asymmetry at machine precision; factorizations symmetrize first.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        let n = self.n_rows;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    /// Relative asymmetry `|M - Mᵀ|_F / max(1, |M|_F)`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let n = self.n_rows;
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.data[i * n + j] - self.data[j * n + i];
                s += 2.0 * d * d;
            }
        }
        s.sqrt() / self.frob_norm().max(1.0)
    }

    /// `|self - other|_F / max(1, |other|_F)`.
    pub fn rel_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut s = 0.0;
        for (a, b) in self.data.iter().zip(&other.data) {
            let d = a - b;
            s += d * d;
        }
        s.sqrt() / other.frob_norm().max(1.0)
    }
}
