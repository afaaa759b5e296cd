//! Continuous-time algebraic Riccati equation: `AᵀX + XA − XGX + H = 0`.
//!
//! Maintained intermediates (all advanced by rank-one/rank-two updates):
//! `M(X) = XGX − AᵀX − XA − H` (so `f = ‖M‖_F²`) and
//! `N(X) = (GX − A)·M(X)`, from which `grad f(X) = N + Nᵀ` applies to
//! vectors in two matvecs without ever forming the gradient.
//!
//! Along the rank-one step `X ← X + α·vvᵀ` the residual restricts to an
//! explicit quartic in `α` built from seven scalars, which is what makes
//! exact line search cheap here.

use super::line::LineObjective;
use super::{check_square, check_symmetric, rel_err, ProblemKind, ProblemWorkspace};
use crate::densela::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::manifold::{DirectionEstimate, SpdState};

/// Coefficients `{A, G, H}` with `G`, `H` symmetric.
#[derive(Clone, Debug)]
pub struct CareInstance {
    pub a: DenseMatrix,
    pub g: DenseMatrix,
    pub h: DenseMatrix,
}

impl CareInstance {
    pub fn new(a: DenseMatrix, g: DenseMatrix, h: DenseMatrix) -> Result<Self> {
        let n = a.n_rows();
        check_square("A", &a, n)?;
        check_square("G", &g, n)?;
        check_square("H", &h, n)?;
        check_symmetric("G", &g)?;
        check_symmetric("H", &h)?;
        Ok(CareInstance { a, g, h })
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    /// `M(X) = XGX − AᵀX − XA − H`, densely. O(n³).
    pub fn dense_residual_matrix(&self, x: &DenseMatrix) -> DenseMatrix {
        let xg = x.matmul(&self.g);
        let mut m = xg.matmul(x);
        let atx = self.a.matmul_transpose_left(x);
        m.add_scaled(-1.0, &atx);
        let xa = x.matmul(&self.a);
        m.add_scaled(-1.0, &xa);
        m.add_scaled(-1.0, &self.h);
        m
    }

    fn dense_n_matrix(&self, x: &DenseMatrix, m: &DenseMatrix) -> DenseMatrix {
        let mut gx = self.g.matmul(x);
        gx.add_scaled(-1.0, &self.a);
        gx.matmul(m)
    }
}

/// Maintained state for one CARE solve.
pub struct CareWorkspace<'a> {
    inst: &'a CareInstance,
    state: SpdState,
    m: DenseMatrix,
    nmat: DenseMatrix,
    f: f64,
    committed: u64,
}

/// The per-direction vectors and scalars every step needs: `v = By`,
/// `w = (XG − Aᵀ)v`, `ω = vᵀGv`, plus the matvecs against `M`.
struct StepVectors {
    v: Vec<f64>,
    w: Vec<f64>,
    gv: Vec<f64>,
    omega: f64,
    mv: Vec<f64>,
    vmw: f64,
    vmv: f64,
    vw: f64,
    v2: f64,
    w2: f64,
}

impl<'a> CareWorkspace<'a> {
    pub fn init(inst: &'a CareInstance, x0: &DenseMatrix) -> Result<Self> {
        let state = SpdState::new(x0, false)?;
        let m = inst.dense_residual_matrix(state.x());
        let nmat = inst.dense_n_matrix(state.x(), &m);
        let f = m.frob_norm_sq();
        Ok(CareWorkspace {
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
        let gv = self.inst.g.matvec(&v);
        let xgv = self.state.x().matvec(&gv);
        let atv = self.inst.a.matvec_transpose(&v);
        let w: Vec<f64> = xgv.iter().zip(&atv).map(|(x, a)| x - a).collect();
        let omega = dot(&v, &gv);
        let mv = self.m.matvec(&v);
        let mw = self.m.matvec(&w);
        StepVectors {
            vmw: dot(&v, &mw),
            vmv: dot(&v, &mv),
            vw: dot(&v, &w),
            v2: dot(&v, &v),
            w2: dot(&w, &w),
            v,
            w,
            gv,
            omega,
            mv,
        }
    }

    fn quartic(&self, s: &StepVectors) -> LineObjective {
        let c0 = self.f;
        let c1 = 4.0 * s.vmw;
        let c2 = 2.0 * (s.omega * s.vmv + s.vw * s.vw + s.v2 * s.w2);
        let c3 = 4.0 * s.omega * s.vw * s.v2;
        let c4 = s.omega * s.omega * s.v2 * s.v2;
        LineObjective::Quartic {
            c: [c0, c1, c2, c3, c4],
        }
    }
}

impl ProblemWorkspace for CareWorkspace<'_> {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Care
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
        let nv = self.nmat.matvec(v);
        let ntv = self.nmat.matvec_transpose(v);
        nv.iter().zip(&ntv).map(|(a, b)| a + b).collect()
    }

    fn line_search_objective(&self, dir: &DirectionEstimate) -> LineObjective {
        self.quartic(&self.step_vectors(&dir.y))
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
        // vectors against the pre-update X for the N recursion
        let xv = self.state.x().matvec(&s.v);
        let av = self.inst.a.matvec(&s.v);
        let p: Vec<f64> = self
            .inst
            .g
            .matvec(&xv)
            .iter()
            .zip(&av)
            .map(|(g, a)| g - a)
            .collect();
        let xw = self.state.x().matvec(&s.w);
        let aw = self.inst.a.matvec(&s.w);
        let q: Vec<f64> = self
            .inst
            .g
            .matvec(&xw)
            .iter()
            .zip(&aw)
            .map(|(g, a)| g - a)
            .collect();
        let f_new = self.quartic(&s).eval(alpha);

        // geodesic step first: it is the only fallible update
        self.state.geodesic_update(&dir.y, alpha)?;

        // N += α(GXₜ−A)(vwᵀ + wvᵀ + αω·vvᵀ)
        //    + α(Gv)((Mₜv)ᵀ + α|v|²wᵀ + α(vᵀw)vᵀ) + α³ω|v|²(Gv)vᵀ
        self.nmat.add_outer(alpha, &p, &s.w);
        self.nmat.add_outer(alpha, &q, &s.v);
        self.nmat.add_outer(alpha * alpha * s.omega, &p, &s.v);
        self.nmat.add_outer(alpha, &s.gv, &s.mv);
        self.nmat.add_outer(alpha * alpha * s.v2, &s.gv, &s.w);
        self.nmat.add_outer(
            alpha * alpha * s.vw + alpha * alpha * alpha * s.omega * s.v2,
            &s.gv,
            &s.v,
        );
        // M += α(vwᵀ + wvᵀ) + α²ω·vvᵀ
        self.m.add_outer(alpha, &s.v, &s.w);
        self.m.add_outer(alpha, &s.w, &s.v);
        self.m.add_outer(alpha * alpha * s.omega, &s.v, &s.v);

        self.f = f_new;
        self.committed += 1;
        Ok(())
    }

    fn refresh(&mut self) -> Result<()> {
        self.state.refresh()?;
        self.m = self.inst.dense_residual_matrix(self.state.x());
        self.nmat = self.inst.dense_n_matrix(self.state.x(), &self.m);
        self.f = self.m.frob_norm_sq();
        Ok(())
    }

    fn committed(&self) -> u64 {
        self.committed
    }

    fn drift_report(&self) -> Result<Vec<(&'static str, f64)>> {
        let m_dense = self.inst.dense_residual_matrix(self.state.x());
        let n_dense = self.inst.dense_n_matrix(self.state.x(), &m_dense);
        let f_dense = m_dense.frob_norm_sq();
        let b_rel = {
            let mut r = self.state.b().reconstruct();
            r.add_scaled(-1.0, self.state.x());
            r.frob_norm() / (1.0 + self.state.x().frob_norm())
        };
        Ok(vec![
            ("M", rel_err(&self.m, &m_dense)),
            ("N", rel_err(&self.nmat, &n_dense)),
            ("f", (self.f - f_dense).abs() / (1.0 + f_dense)),
            ("B", b_rel),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_instance_is_solved_at_identity() {
        // A = 0, G = I, H = I, X0 = I: M = I·I·I − I = 0
        let n = 3;
        let inst = CareInstance::new(
            DenseMatrix::zeros(n, n),
            DenseMatrix::identity(n),
            DenseMatrix::identity(n),
        )
        .unwrap();
        let ws = CareWorkspace::init(&inst, &DenseMatrix::identity(n)).unwrap();
        assert!(ws.residual_value() <= 1e-20);
        let g = ws.grad_apply(&[1.0, 0.0, 0.0]);
        assert!(g.iter().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn dense_residual_constant_case() {
        // A = 0, G = 0, H = I: M = -I, f = n
        let n = 4;
        let inst = CareInstance::new(
            DenseMatrix::zeros(n, n),
            DenseMatrix::zeros(n, n),
            DenseMatrix::identity(n),
        )
        .unwrap();
        let x = DenseMatrix::diag(&[0.5, 2.0, 7.0, 0.1]);
        let f = inst.dense_residual_matrix(&x).frob_norm_sq();
        assert!((f - n as f64).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_g() {
        let mut g = DenseMatrix::identity(2);
        g.set(0, 1, 0.5);
        let r = CareInstance::new(DenseMatrix::zeros(2, 2), g, DenseMatrix::identity(2));
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn commit_alpha_zero_only_touches_counter() {
        let n = 2;
        let inst = CareInstance::new(
            DenseMatrix::identity(n),
            DenseMatrix::identity(n),
            DenseMatrix::identity(n),
        )
        .unwrap();
        let mut ws = CareWorkspace::init(&inst, &DenseMatrix::identity(n)).unwrap();
        let m_before = ws.m.clone();
        let f_before = ws.f;
        let dir = DirectionEstimate {
            y: vec![1.0, 0.0],
            lambda: 1.0,
        };
        ws.commit_update(&dir, 0.0).unwrap();
        assert_eq!(ws.committed(), 1);
        assert_eq!(ws.f.to_bits(), f_before.to_bits());
        assert_eq!(ws.m.entries(), m_before.entries());
    }
}
