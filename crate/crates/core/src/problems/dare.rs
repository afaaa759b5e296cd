//! Discrete-time algebraic Riccati equation: `X − AᵀX(I + GX)⁻¹A − Q = 0`.
//!
//! Maintained: the shifted inverse `M₁(X) = (I + GX)⁻¹`, the product
//! `K(X) = AᵀX·M₁·A` (so the residual is `M = X − K − Q`), and `M` itself.
//! The gradient factors `M₂ = A·M·Aᵀ·M₁ᵀ` and `M₃ = G·M₁ᵀ·X` are never
//! materialized; `grad_apply` composes them from `M`, `M₁`, `X`, `A`, `G`
//! as chained matvecs.
//!
//! For the step `X ← X + α·uuᵀ` with `u = By`, Sherman-Morrison on `I + GX`
//! gives `M₁ ← M₁ − α·b₁·h·(M₁ᵀu)ᵀ` with `h = M₁Gu`, `b₁ = (1+α·a₂)⁻¹`,
//! `a₂ = uᵀh`; `K` then advances by the single rank-one term `α·b₁·r·vᵀ`
//! with `v = AᵀM₁ᵀu` and `r = Aᵀu − AᵀXh`, which keeps the residual
//! restriction rational in `α`.

use super::line::LineObjective;
use super::{check_square, check_symmetric, rel_err, ProblemKind, ProblemWorkspace};
use crate::densela::{dot, DenseMatrix, LuFactors};
use crate::error::{Error, Result};
use crate::manifold::{DirectionEstimate, SpdState};

/// Coefficients `{A, G, Q}` with `G`, `Q` symmetric.
#[derive(Clone, Debug)]
pub struct DareInstance {
    pub a: DenseMatrix,
    pub g: DenseMatrix,
    pub q: DenseMatrix,
}

impl DareInstance {
    pub fn new(a: DenseMatrix, g: DenseMatrix, q: DenseMatrix) -> Result<Self> {
        let n = a.n_rows();
        check_square("A", &a, n)?;
        check_square("G", &g, n)?;
        check_square("Q", &q, n)?;
        check_symmetric("G", &g)?;
        check_symmetric("Q", &q)?;
        Ok(DareInstance { a, g, q })
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    /// `(I + GX)⁻¹` by LU; fails with [`Error::SingularShift`].
    pub fn shift_inverse(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.n();
        let mut shift = self.g.matmul(x);
        shift.add_scaled(1.0, &DenseMatrix::identity(n));
        match LuFactors::factor(&shift) {
            Ok(lu) => Ok(lu.inverse()),
            Err(Error::Singular) => Err(Error::SingularShift),
            Err(e) => Err(e),
        }
    }

    /// `K(X) = AᵀX·M₁·A`, densely.
    pub(crate) fn dense_k(&self, x: &DenseMatrix, m1: &DenseMatrix) -> DenseMatrix {
        let t = x.matmul(&m1.matmul(&self.a));
        self.a.matmul_transpose_left(&t)
    }

    /// `M(X) = X − AᵀX(I+GX)⁻¹A − Q`, densely. O(n³).
    pub fn dense_residual_matrix(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let m1 = self.shift_inverse(x)?;
        let k = self.dense_k(x, &m1);
        let mut m = x.clone();
        m.add_scaled(-1.0, &k);
        m.add_scaled(-1.0, &self.q);
        Ok(m)
    }
}

pub struct DareWorkspace<'a> {
    inst: &'a DareInstance,
    state: SpdState,
    m1: DenseMatrix,
    k: DenseMatrix,
    m: DenseMatrix,
    f: f64,
    committed: u64,
}

struct StepVectors {
    u: Vec<f64>,
    m1tu: Vec<f64>,
    v: Vec<f64>,
    h: Vec<f64>,
    r: Vec<f64>,
    a2: f64,
    a3: f64,
    a4: f64,
    umu: f64,
    vmr: f64,
    u4: f64,
    ur: f64,
    r2: f64,
}

impl<'a> DareWorkspace<'a> {
    pub fn init(inst: &'a DareInstance, x0: &DenseMatrix) -> Result<Self> {
        let state = SpdState::new(x0, false)?;
        let m1 = inst.shift_inverse(state.x())?;
        let k = inst.dense_k(state.x(), &m1);
        let mut m = state.x().clone();
        m.add_scaled(-1.0, &k);
        m.add_scaled(-1.0, &inst.q);
        let f = m.frob_norm_sq();
        Ok(DareWorkspace {
            inst,
            state,
            m1,
            k,
            m,
            f,
            committed: 0,
        })
    }

    fn step_vectors(&self, y: &[f64]) -> StepVectors {
        let u = self.state.b().matvec(y);
        let m1tu = self.m1.matvec_transpose(&u);
        let v = self.inst.a.matvec_transpose(&m1tu);
        let h = self.m1.matvec(&self.inst.g.matvec(&u));
        let xh = self.state.x().matvec(&h);
        let w = self.inst.a.matvec_transpose(&xh);
        let s = self.inst.a.matvec_transpose(&u);
        let r: Vec<f64> = s.iter().zip(&w).map(|(a, b)| a - b).collect();
        let mu_vec = self.m.matvec(&u);
        let mv = self.m.matvec(&v);
        let u2 = dot(&u, &u);
        StepVectors {
            a2: dot(&u, &h),
            a3: dot(&u, &v),
            a4: dot(&v, &v),
            umu: dot(&u, &mu_vec),
            vmr: dot(&mv, &r),
            u4: u2 * u2,
            ur: dot(&u, &r),
            r2: dot(&r, &r),
            u,
            m1tu,
            v,
            h,
            r,
        }
    }

    fn rational(&self, s: &StepVectors) -> LineObjective {
        LineObjective::DareRational {
            f0: self.f,
            umu: s.umu,
            vmr: s.vmr,
            u4: s.u4,
            a2: s.a2,
            a3: s.a3,
            ur: s.ur,
            a4: s.a4,
            r2: s.r2,
        }
    }

    /// `M₂ᵀ·v = M₁·A·M·Aᵀ·v` as chained matvecs.
    fn m2t_apply(&self, v: &[f64]) -> Vec<f64> {
        let t = self.inst.a.matvec_transpose(v);
        let t = self.m.matvec(&t);
        let t = self.inst.a.matvec(&t);
        self.m1.matvec(&t)
    }

    /// `M₂·v = A·M·Aᵀ·M₁ᵀ·v`.
    fn m2_apply(&self, v: &[f64]) -> Vec<f64> {
        let t = self.m1.matvec_transpose(v);
        let t = self.inst.a.matvec_transpose(&t);
        let t = self.m.matvec(&t);
        self.inst.a.matvec(&t)
    }
}

impl ProblemWorkspace for DareWorkspace<'_> {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Dare
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
        // grad f = 2M + (−I + M₃)M₂ + M₂ᵀ(−I + M₃ᵀ), applied to v
        let mv = self.m.matvec(v);
        let m2v = self.m2_apply(v);
        // M₃·(M₂v) = G·M₁ᵀ·X·(M₂v)
        let t = self.state.x().matvec(&m2v);
        let t = self.m1.matvec_transpose(&t);
        let m3m2v = self.inst.g.matvec(&t);
        let m2tv = self.m2t_apply(v);
        // M₃ᵀ·v = X·M₁·G·v, then M₂ᵀ·(M₃ᵀv)
        let t = self.inst.g.matvec(v);
        let t = self.m1.matvec(&t);
        let m3tv = self.state.x().matvec(&t);
        let m2tm3tv = self.m2t_apply(&m3tv);
        (0..v.len())
            .map(|i| 2.0 * mv[i] - m2v[i] + m3m2v[i] - m2tv[i] + m2tm3tv[i])
            .collect()
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
        let denom = 1.0 + alpha * s.a2;
        if denom.abs() < 1e-10 {
            return Err(Error::InadmissibleStep { alpha });
        }
        let b1 = 1.0 / denom;
        let f_new = self.rational(&s).eval(alpha);

        // geodesic step first: it is the only fallible update
        self.state.geodesic_update(&dir.y, alpha)?;

        // M₁ ← M₁ − α·b₁·h·(M₁ᵀu)ᵀ
        self.m1.add_outer(-alpha * b1, &s.h, &s.m1tu);
        // K ← K + α·b₁·r·vᵀ, M ← M + α·uuᵀ − α·b₁·r·vᵀ
        self.k.add_outer(alpha * b1, &s.r, &s.v);
        self.m.add_outer(alpha, &s.u, &s.u);
        self.m.add_outer(-alpha * b1, &s.r, &s.v);

        self.f = f_new;
        self.committed += 1;
        Ok(())
    }

    fn refresh(&mut self) -> Result<()> {
        self.state.refresh()?;
        self.m1 = self.inst.shift_inverse(self.state.x())?;
        self.k = self.inst.dense_k(self.state.x(), &self.m1);
        self.m = self.state.x().clone();
        self.m.add_scaled(-1.0, &self.k);
        self.m.add_scaled(-1.0, &self.inst.q);
        self.f = self.m.frob_norm_sq();
        Ok(())
    }

    fn committed(&self) -> u64 {
        self.committed
    }

    fn drift_report(&self) -> Result<Vec<(&'static str, f64)>> {
        let m1_dense = self.inst.shift_inverse(self.state.x())?;
        let k_dense = self.inst.dense_k(self.state.x(), &m1_dense);
        let mut m_dense = self.state.x().clone();
        m_dense.add_scaled(-1.0, &k_dense);
        m_dense.add_scaled(-1.0, &self.inst.q);
        let f_dense = m_dense.frob_norm_sq();
        let b_rel = {
            let mut r = self.state.b().reconstruct();
            r.add_scaled(-1.0, self.state.x());
            r.frob_norm() / (1.0 + self.state.x().frob_norm())
        };
        // M₁(I + GX) = I residual, scaled by sqrt(n)
        let n = self.dim();
        let shift = {
            let mut sh = self.inst.g.matmul(self.state.x());
            sh.add_scaled(1.0, &DenseMatrix::identity(n));
            sh
        };
        let mut prod = self.m1.matmul(&shift);
        prod.add_scaled(-1.0, &DenseMatrix::identity(n));
        let m1_resid = prod.frob_norm() / (n as f64).sqrt();
        Ok(vec![
            ("M1", rel_err(&self.m1, &m1_dense)),
            ("M1*(I+GX)-I", m1_resid),
            ("K", rel_err(&self.k, &k_dense)),
            ("M", rel_err(&self.m, &m_dense)),
            ("f", (self.f - f_dense).abs() / (1.0 + f_dense)),
            ("B", b_rel),
        ])
    }
}
