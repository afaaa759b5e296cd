//! The nonlinear matrix equation `X + AᵀX⁻¹A = Q`.
//!
//! Maintained: `M(X) = X + AᵀX⁻¹A − Q`, `N(X) = X⁻¹·A·M(X)·Aᵀ·X⁻¹`, and the
//! inverse `X⁻¹` itself (the one inverse node of this objective). The
//! gradient is `grad f(X) = 2M − 2N`.
//!
//! For the step `X ← X + α·vvᵀ` with `v = By`, Sherman-Morrison gives
//! `X⁻¹ ← X⁻¹ + μ·zzᵀ` with `μ = −α/(1+α)` and `z = B⁻ᵀy`, so
//! `M ← M + α·vvᵀ + μ·wwᵀ` with `w = Aᵀz` and the residual restricts to a
//! rational function of `α` built from five scalars.

use super::line::LineObjective;
use super::{check_square, check_symmetric, rel_err, ProblemKind, ProblemWorkspace};
use crate::densela::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::manifold::{DirectionEstimate, SpdState};

/// Coefficients `{A, Q}` with `Q` symmetric (and SPD for solvable cases).
#[derive(Clone, Debug)]
pub struct NmeInstance {
    pub a: DenseMatrix,
    pub q: DenseMatrix,
}

impl NmeInstance {
    pub fn new(a: DenseMatrix, q: DenseMatrix) -> Result<Self> {
        let n = a.n_rows();
        check_square("A", &a, n)?;
        check_square("Q", &q, n)?;
        check_symmetric("Q", &q)?;
        Ok(NmeInstance { a, q })
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    /// `M(X) = X + AᵀX⁻¹A − Q`, densely; fails when `X` is not SPD.
    pub fn dense_residual_matrix(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let state = SpdState::new(x, true)?;
        Ok(self.dense_residual_from_inverse(x, state.xinv().expect("inverse requested")))
    }

    fn dense_residual_from_inverse(&self, x: &DenseMatrix, xinv: &DenseMatrix) -> DenseMatrix {
        let xinv_a = xinv.matmul(&self.a);
        let mut m = self.a.matmul_transpose_left(&xinv_a);
        m.add_scaled(1.0, x);
        m.add_scaled(-1.0, &self.q);
        m
    }

    fn dense_n_matrix(&self, xinv: &DenseMatrix, m: &DenseMatrix) -> DenseMatrix {
        let c = xinv.matmul(&self.a); // X⁻¹A
        c.matmul(&m.matmul(&c.transpose()))
    }
}

pub struct NmeWorkspace<'a> {
    inst: &'a NmeInstance,
    state: SpdState,
    m: DenseMatrix,
    nmat: DenseMatrix,
    f: f64,
    committed: u64,
}

struct StepVectors {
    v: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
    mw: Vec<f64>,
    vw: f64,
    w2: f64,
    vmv: f64,
    wmw: f64,
    v4: f64,
    w4: f64,
    vw2: f64,
}

impl<'a> NmeWorkspace<'a> {
    pub fn init(inst: &'a NmeInstance, x0: &DenseMatrix) -> Result<Self> {
        let state = SpdState::new(x0, true)?;
        let xinv = state.xinv().expect("NME maintains the inverse");
        let m = inst.dense_residual_from_inverse(state.x(), xinv);
        let nmat = inst.dense_n_matrix(xinv, &m);
        let f = m.frob_norm_sq();
        Ok(NmeWorkspace {
            inst,
            state,
            m,
            nmat,
            f,
            committed: 0,
        })
    }

    fn step_vectors(&self, y: &[f64]) -> StepVectors {
        let v = self.state.b().matvec(y);
        let z = self.state.b().solve(y, true);
        let w = self.inst.a.matvec_transpose(&z);
        let mv = self.m.matvec(&v);
        let mw = self.m.matvec(&w);
        let v2 = dot(&v, &v);
        let w2 = dot(&w, &w);
        let vw = dot(&v, &w);
        StepVectors {
            vmv: dot(&v, &mv),
            wmw: dot(&w, &mw),
            v4: v2 * v2,
            w4: w2 * w2,
            vw2: vw * vw,
            vw,
            w2,
            v,
            z,
            w,
            mw,
        }
    }

    fn rational(&self, s: &StepVectors) -> LineObjective {
        LineObjective::NmeRational {
            f0: self.f,
            vmv: s.vmv,
            wmw: s.wmw,
            v4: s.v4,
            w4: s.w4,
            vw2: s.vw2,
        }
    }
}

impl ProblemWorkspace for NmeWorkspace<'_> {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Nme
    }

    fn dim(&self) -> usize {
        self.inst.n()
    }

    fn state(&self) -> &SpdState {
        &self.state
    }

    fn residual_value(&self) -> f64 {
        self.f
    }

    fn grad_apply(&self, v: &[f64]) -> Vec<f64> {
        let mv = self.m.matvec(v);
        let nv = self.nmat.matvec(v);
        mv.iter().zip(&nv).map(|(m, n)| 2.0 * (m - n)).collect()
    }

    fn line_search_objective(&self, dir: &DirectionEstimate) -> LineObjective {
        self.rational(&self.step_vectors(&dir.y))
    }

    fn commit_update(&mut self, dir: &DirectionEstimate, alpha: f64) -> Result<()> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::InadmissibleStep { alpha });
        }
        if alpha == 0.0 {
            self.committed += 1;
            return Ok(());
        }
        let s = self.step_vectors(&dir.y);
        let mu = -alpha / (1.0 + alpha);
        let xinv = self.state.xinv().expect("NME maintains the inverse");
        // everything below reads the pre-update inverse and factor
        let g = xinv.matvec(&self.inst.a.matvec(&s.v));
        let h = xinv.matvec(&self.inst.a.matvec(&s.w));
        // M_{t+1}·w without forming M_{t+1}: Mw + α(vᵀw)v + μ|w|²w
        let mut m1w = s.mw.clone();
        for i in 0..m1w.len() {
            m1w[i] += alpha * s.vw * s.v[i] + mu * s.w2 * s.w[i];
        }
        let c = dot(&s.w, &m1w);
        let svec = xinv.matvec(&self.inst.a.matvec(&m1w));
        let f_new = self.rational(&s).eval(alpha);

        // geodesic step first: it is the only fallible update
        self.state.geodesic_update(&dir.y, alpha)?;

        // M ← M + α·vvᵀ + μ·wwᵀ
        self.m.add_outer(alpha, &s.v, &s.v);
        self.m.add_outer(mu, &s.w, &s.w);
        // N ← N + α·ggᵀ + μ·hhᵀ + μ(zsᵀ + szᵀ) + μ²(wᵀM_{t+1}w)·zzᵀ
        self.nmat.add_outer(alpha, &g, &g);
        self.nmat.add_outer(mu, &h, &h);
        self.nmat.add_outer(mu, &s.z, &svec);
        self.nmat.add_outer(mu, &svec, &s.z);
        self.nmat.add_outer(mu * mu * c, &s.z, &s.z);

        self.f = f_new;
        self.committed += 1;
        Ok(())
    }

    fn refresh(&mut self) -> Result<()> {
        self.state.refresh()?;
        let xinv = self.state.xinv().expect("inverse maintained");
        self.m = self.inst.dense_residual_from_inverse(self.state.x(), xinv);
        self.nmat = self.inst.dense_n_matrix(xinv, &self.m);
        self.f = self.m.frob_norm_sq();
        Ok(())
    }

    fn committed(&self) -> u64 {
        self.committed
    }

    fn drift_report(&self) -> Result<Vec<(&'static str, f64)>> {
        let fresh = SpdState::new(self.state.x(), true)?;
        let xinv_dense = fresh.xinv().expect("inverse requested");
        let m_dense = self
            .inst
            .dense_residual_from_inverse(self.state.x(), xinv_dense);
        let n_dense = self.inst.dense_n_matrix(xinv_dense, &m_dense);
        let f_dense = m_dense.frob_norm_sq();
        let b_rel = {
            let mut r = self.state.b().reconstruct();
            r.add_scaled(-1.0, self.state.x());
            r.frob_norm() / (1.0 + self.state.x().frob_norm())
        };
        let xinv_rel = rel_err(self.state.xinv().expect("inverse"), xinv_dense);
        Ok(vec![
            ("M", rel_err(&self.m, &m_dense)),
            ("N", rel_err(&self.nmat, &n_dense)),
            ("Xinv", xinv_rel),
            ("f", (self.f - f_dense).abs() / (1.0 + f_dense)),
            ("B", b_rel),
        ])
    }
}
