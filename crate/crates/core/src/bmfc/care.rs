//! CARE under the factorized parametrization.
//!
//! Maintains `M'(Y) = XGX − AᵀX − XA − H` with `X = YYᵀ`. A coordinate step
//! turns into `M' ← M' + PUᵀ + UPᵀ + UΔ'Uᵀ` with `P = (XG − Aᵀ)UΔ` and
//! `Δ' = Δ·(UᵀGU)·Δ`, and the restricted residual is a degree-8 polynomial
//! in `δ` whose coefficients live in 2×2 trace blocks, so exact line search
//! costs O(1) per trial after O(n²) setup.

use super::{add_pair_outer, add_sandwich, unit, BmfcConfig, BmfcProblemState, Mat2, Pair};
use crate::densela::DenseMatrix;
use crate::error::Result;
use crate::problems::CareInstance;
use crate::solver::scalar_minimize_bounded;

pub struct BmfcCare<'a> {
    inst: &'a CareInstance,
    y: DenseMatrix,
    x: DenseMatrix,
    mprime: DenseMatrix,
    f: f64,
}

struct Blocks {
    u: Pair,
    z: Pair,
    c1: Mat2,
    c2: Mat2,
    c3: Mat2,
    c4: Mat2,
    c5: Mat2,
    w: Mat2,
}

impl<'a> BmfcCare<'a> {
    pub fn init(inst: &'a CareInstance, y0: DenseMatrix) -> Result<Self> {
        let x = y0.matmul(&y0.transpose());
        let mprime = inst.dense_residual_matrix(&x);
        let f = mprime.frob_norm_sq();
        Ok(BmfcCare {
            inst,
            y: y0,
            x,
            mprime,
            f,
        })
    }

    fn blocks(&self, i: usize, j: usize) -> Blocks {
        let n = self.y.n_rows();
        let u = Pair {
            c0: self.y.col(j),
            c1: unit(n, i),
        };
        // Z = (XG − Aᵀ)U, column by column
        let z = u.map(|c| {
            let gc = self.inst.g.matvec(c);
            let xgc = self.x.matvec(&gc);
            let atc = self.inst.a.matvec_transpose(c);
            xgc.iter().zip(&atc).map(|(p, q)| p - q).collect()
        });
        let mu = u.map(|c| self.mprime.matvec(c));
        let mz = z.map(|c| self.mprime.matvec(c));
        let gu = u.map(|c| self.inst.g.matvec(c));
        Blocks {
            c1: u.gram(&mz),
            c2: u.gram(&mu),
            c3: u.gram(&u),
            c4: z.gram(&z),
            c5: u.gram(&z),
            w: u.gram(&gu),
            u,
            z,
        }
    }

    fn phi(&self, b: &Blocks, delta: f64) -> f64 {
        let d = Mat2::delta(delta);
        let dp = d.mul(b.w).mul(d);
        self.f
            + 4.0 * b.c1.mul(d).trace()
            + 2.0 * b.c2.mul(dp).trace()
            + dp.mul(b.c3).mul(dp).mul(b.c3).trace()
            + 2.0 * d.mul(b.c4).mul(d).mul(b.c3).trace()
            + 2.0 * b.c5.mul(d).mul(b.c5).mul(d).trace()
            + 2.0 * dp.mul(b.c3).mul(d).mul(b.c5.transpose()).trace()
            + 2.0 * dp.mul(b.c5).mul(d).mul(b.c3).trace()
    }
}

impl BmfcProblemState for BmfcCare<'_> {
    fn n(&self) -> usize {
        self.y.n_rows()
    }

    fn f(&self) -> f64 {
        self.f
    }

    fn x(&self) -> &DenseMatrix {
        &self.x
    }

    fn y(&self) -> &DenseMatrix {
        &self.y
    }

    fn partial_gradient(&self, i: usize, j: usize) -> f64 {
        // grad_X f = N + Nᵀ with N = (GX − A)M'
        let v = self.y.col(j);
        let mv = self.mprime.matvec(&v);
        let nv: Vec<f64> = {
            let xm = self.x.matvec(&mv);
            let gxm = self.inst.g.matvec(&xm);
            let am = self.inst.a.matvec(&mv);
            gxm.iter().zip(&am).map(|(p, q)| p - q).collect()
        };
        let ntv = {
            let gv = self.inst.g.matvec(&v);
            let xgv = self.x.matvec(&gv);
            let atv = self.inst.a.matvec_transpose(&v);
            let t: Vec<f64> = xgv.iter().zip(&atv).map(|(p, q)| p - q).collect();
            self.mprime.matvec(&t)
        };
        2.0 * (nv[i] + ntv[i])
    }

    fn line_search(&self, i: usize, j: usize, cfg: &BmfcConfig) -> Result<f64> {
        let b = self.blocks(i, j);
        let (lo, hi) = cfg.delta_interval;
        let best = scalar_minimize_bounded(|d| self.phi(&b, d), lo, hi);
        if self.phi(&b, best) < self.f {
            Ok(best)
        } else {
            Ok(0.0)
        }
    }

    fn commit(&mut self, i: usize, j: usize, delta: f64) -> Result<()> {
        if delta == 0.0 {
            return Ok(());
        }
        let b = self.blocks(i, j);
        let f_new = self.phi(&b, delta);
        let d = Mat2::delta(delta);
        let dp = d.mul(b.w).mul(d);
        let p = b.z.mul_mat2(d);
        add_pair_outer(&mut self.mprime, &p, &b.u);
        add_pair_outer(&mut self.mprime, &b.u, &p);
        add_sandwich(&mut self.mprime, &b.u, dp);
        add_sandwich(&mut self.x, &b.u, d);
        let yij = self.y.get(i, j);
        self.y.set(i, j, yij - delta);
        self.f = f_new;
        Ok(())
    }

    fn refresh(&mut self) -> Result<()> {
        self.x = self.y.matmul(&self.y.transpose());
        self.mprime = self.inst.dense_residual_matrix(&self.x);
        self.f = self.mprime.frob_norm_sq();
        Ok(())
    }

    fn drift_report(&self) -> Result<Vec<(&'static str, f64)>> {
        let x_dense = self.y.matmul(&self.y.transpose());
        let m_dense = self.inst.dense_residual_matrix(&x_dense);
        let f_dense = m_dense.frob_norm_sq();
        Ok(vec![
            ("X", crate::problems::rel_err(&self.x, &x_dense)),
            ("M'", crate::problems::rel_err(&self.mprime, &m_dense)),
            ("f", (self.f - f_dense).abs() / (1.0 + f_dense)),
        ])
    }
}
