//! `X + AᵀX⁻¹A = Q` under the factorized parametrization.
//!
//! Maintains `Y⁻¹` (one Sherman-Morrison per coordinate step),
//! `X⁻¹ = Y⁻ᵀY⁻¹` (rank-two), `X`, and the residual `M`. The restricted
//! residual is rational in `δ` through `φ(δ) = δ/(1 − δ·[Y⁻¹]ⱼᵢ)`, again in
//! 2×2 trace blocks, so exact line search applies.

use super::{add_sandwich, unit, BmfcConfig, BmfcProblemState, Mat2, Pair};
use crate::densela::{dot, DenseMatrix, LuFactors};
use crate::error::{Error, Result};
use crate::problems::NmeInstance;
use crate::solver::{clip_interval, scalar_minimize_bounded};

pub struct BmfcNme<'a> {
    inst: &'a NmeInstance,
    y: DenseMatrix,
    yinv: DenseMatrix,
    x: DenseMatrix,
    xinv: DenseMatrix,
    m: DenseMatrix,
    f: f64,
}

struct Blocks {
    u: Pair,
    v: Pair,
    w: Pair,
    umu: Mat2,
    wmw: Mat2,
    uu: Mat2,
    ww: Mat2,
    uw: Mat2,
    /// `[Y⁻¹]ⱼᵢ`, the Sherman-Morrison pivot of this coordinate.
    yji: f64,
    /// `|Y⁻¹eᵢ|²`.
    psq: f64,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl<'a> BmfcNme<'a> {
    pub fn init(inst: &'a NmeInstance, y0: DenseMatrix) -> Result<Self> {
        let yinv = LuFactors::factor(&y0)?.inverse();
        let x = y0.matmul(&y0.transpose());
        let xinv = yinv.matmul_transpose_left(&yinv);
        let m = dense_m(inst, &x, &xinv);
        let f = m.frob_norm_sq();
        Ok(BmfcNme {
            inst,
            y: y0,
            yinv,
            x,
            xinv,
            m,
            f,
        })
    }

    fn blocks(&self, i: usize, j: usize) -> Blocks {
        let n = self.y.n_rows();
        let u = Pair {
            c0: self.y.col(j),
            c1: unit(n, i),
        };
        let p = self.yinv.col(i); // Y⁻¹eᵢ
        let q = self.yinv.row(j).to_vec(); // Y⁻ᵀeⱼ
        let v = Pair {
            c0: self.yinv.matvec_transpose(&p),
            c1: q.clone(),
        };
        let w = v.map(|c| self.inst.a.matvec_transpose(c));
        let mu = u.map(|c| self.m.matvec(c));
        let mw = w.map(|c| self.m.matvec(c));
        Blocks {
            umu: u.gram(&mu),
            wmw: w.gram(&mw),
            uu: u.gram(&u),
            ww: w.gram(&w),
            uw: u.gram(&w),
            yji: self.yinv.get(j, i),
            psq: dot(&p, &p),
            p,
            q,
            u,
            v,
            w,
        }
    }

    fn sm_coeff(b: &Blocks, delta: f64) -> f64 {
        delta / (1.0 - delta * b.yji)
    }

    fn phi_mat(b: &Blocks, delta: f64) -> Mat2 {
        let s = Self::sm_coeff(b, delta);
        Mat2([0.0, s, s, s * s * b.psq])
    }

    fn phi(&self, b: &Blocks, delta: f64) -> f64 {
        let d = Mat2::delta(delta);
        let ph = Self::phi_mat(b, delta);
        self.f
            + 2.0 * d.mul(b.umu).trace()
            + 2.0 * ph.mul(b.wmw).trace()
            + d.mul(b.uu).mul(d).mul(b.uu).trace()
            + ph.mul(b.ww).mul(ph).mul(b.ww).trace()
            + 2.0 * d.mul(b.uw).mul(ph).mul(b.uw.transpose()).trace()
    }
}

fn dense_m(inst: &NmeInstance, x: &DenseMatrix, xinv: &DenseMatrix) -> DenseMatrix {
    let xinv_a = xinv.matmul(&inst.a);
    let mut m = inst.a.matmul_transpose_left(&xinv_a);
    m.add_scaled(1.0, x);
    m.add_scaled(-1.0, &inst.q);
    m
}

impl BmfcProblemState for BmfcNme<'_> {
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
        // grad_X f = 2M − 2X⁻¹·A·M·Aᵀ·X⁻¹
        let v = self.y.col(j);
        let mv = self.m.matvec(&v);
        let t = self.xinv.matvec(&v);
        let t = self.inst.a.matvec_transpose(&t);
        let t = self.m.matvec(&t);
        let t = self.inst.a.matvec(&t);
        let nv = self.xinv.matvec(&t);
        2.0 * (2.0 * mv[i] - 2.0 * nv[i])
    }

    fn line_search(&self, i: usize, j: usize, cfg: &BmfcConfig) -> Result<f64> {
        let b = self.blocks(i, j);
        let poles = if b.yji != 0.0 {
            vec![1.0 / b.yji]
        } else {
            Vec::new()
        };
        let (lo, hi) = match clip_interval(cfg.delta_interval, &poles) {
            Ok(iv) => iv,
            Err(Error::PoleInObjective { .. }) => return Ok(0.0),
            Err(e) => return Err(e),
        };
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
        let den = 1.0 - delta * b.yji;
        if den.abs() < 1e-12 {
            return Err(Error::SingularUpdate { denom: den });
        }
        let f_new = self.phi(&b, delta);
        let d = Mat2::delta(delta);
        let ph = Self::phi_mat(&b, delta);
        let s = Self::sm_coeff(&b, delta);
        // Y⁻¹ ← Y⁻¹ + s·pqᵀ,  X⁻¹ ← X⁻¹ + VΦVᵀ,  X ← X + UΔUᵀ
        self.yinv.add_outer(s, &b.p, &b.q);
        add_sandwich(&mut self.xinv, &b.v, ph);
        add_sandwich(&mut self.x, &b.u, d);
        // M ← M + UΔUᵀ + WΦWᵀ
        add_sandwich(&mut self.m, &b.u, d);
        add_sandwich(&mut self.m, &b.w, ph);
        let yij = self.y.get(i, j);
        self.y.set(i, j, yij - delta);
        self.f = f_new;
        Ok(())
    }

    fn refresh(&mut self) -> Result<()> {
        self.yinv = LuFactors::factor(&self.y)?.inverse();
        self.x = self.y.matmul(&self.y.transpose());
        self.xinv = self.yinv.matmul_transpose_left(&self.yinv);
        self.m = dense_m(self.inst, &self.x, &self.xinv);
        self.f = self.m.frob_norm_sq();
        Ok(())
    }

    fn drift_report(&self) -> Result<Vec<(&'static str, f64)>> {
        let yinv_dense = LuFactors::factor(&self.y)?.inverse();
        let x_dense = self.y.matmul(&self.y.transpose());
        let xinv_dense = yinv_dense.matmul_transpose_left(&yinv_dense);
        let m_dense = dense_m(self.inst, &x_dense, &xinv_dense);
        let f_dense = m_dense.frob_norm_sq();
        Ok(vec![
            ("X", crate::problems::rel_err(&self.x, &x_dense)),
            ("Yinv", crate::problems::rel_err(&self.yinv, &yinv_dense)),
            ("Xinv", crate::problems::rel_err(&self.xinv, &xinv_dense)),
            ("M", crate::problems::rel_err(&self.m, &m_dense)),
            ("f", (self.f - f_dense).abs() / (1.0 + f_dense)),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_instance() -> NmeInstance {
        let a = DenseMatrix::from_rows(&[&[0.2, -0.1], &[0.1, 0.15]]);
        let q = DenseMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.6]]);
        NmeInstance::new(a, q).unwrap()
    }

    #[test]
    fn phi_matches_dense_reevaluation() {
        let inst = small_instance();
        let y0 = DenseMatrix::from_rows(&[&[1.2, 0.0], &[0.3, 0.9]]);
        let st = BmfcNme::init(&inst, y0).unwrap();
        let (i, j) = (0, 1);
        let b = st.blocks(i, j);
        for k in 0..50 {
            let delta = -0.8 + 1.6 * k as f64 / 49.0;
            if (1.0 - delta * b.yji).abs() < 1e-3 {
                continue;
            }
            let mut y = st.y.clone();
            y.set(i, j, y.get(i, j) - delta);
            let yinv = match LuFactors::factor(&y) {
                Ok(lu) => lu.inverse(),
                Err(_) => continue,
            };
            let x = y.matmul(&y.transpose());
            let xinv = yinv.matmul_transpose_left(&yinv);
            let want = dense_m(&inst, &x, &xinv).frob_norm_sq();
            let got = st.phi(&b, delta);
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want),
                "delta {delta}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn commits_track_dense_state() {
        let inst = small_instance();
        let mut st = BmfcNme::init(&inst, DenseMatrix::identity(2)).unwrap();
        for (i, j, d) in [(0, 0, 0.2), (1, 0, -0.15), (0, 1, 0.1), (1, 1, 0.05)] {
            st.commit(i, j, d).unwrap();
        }
        for (name, err) in st.drift_report().unwrap() {
            assert!(err < 1e-11, "{name}: {err}");
        }
    }

    #[test]
    fn singular_factor_update_rejected() {
        let inst = small_instance();
        let mut st = BmfcNme::init(&inst, DenseMatrix::identity(2)).unwrap();
        // delta exactly at the pole 1/[Y⁻¹]ⱼᵢ = 1 for (i,j) = (0,0)
        let err = st.commit(0, 0, 1.0).unwrap_err();
        assert!(matches!(err, Error::SingularUpdate { .. }));
    }
}
