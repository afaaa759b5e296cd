//! DARE under the factorized parametrization.
//!
//! Maintains `X = YYᵀ`, the inverse of the shift `N(Y) = I + GX` (advanced
//! by a chain of three Sherman-Morrison corrections per coordinate step,
//! since the rank-two change of `X` induces three rank-one changes of `N`),
//! the product `K' = AᵀX·N⁻¹·A`, and the residual `M = X − K' − Q`.
//!
//! The restricted residual is a high-degree rational function of `δ` with
//! no usable closed form, so the step size comes from Armijo backtracking
//! along `D = −sign(∂f/∂Yᵢⱼ)·eᵢeⱼᵀ`; every trial is evaluated in O(n²)
//! through the same rank-one chains a commit would apply.

use super::{unit, BmfcConfig, BmfcProblemState};
use crate::densela::{axpy, dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::problems::DareInstance;

pub struct BmfcDare<'a> {
    inst: &'a DareInstance,
    y: DenseMatrix,
    x: DenseMatrix,
    ninv: DenseMatrix,
    kprime: DenseMatrix,
    m: DenseMatrix,
    f: f64,
}

/// All rank-one corrections of one prospective step `Y ← Y − δ·eᵢeⱼᵀ`,
/// plus the resulting residual value. Building this costs O(n²); applying
/// it is a handful of outer-product accumulations.
struct StepTerms {
    f_new: f64,
    x_terms: Vec<(f64, Vec<f64>, Vec<f64>)>,
    ninv_terms: Vec<(f64, Vec<f64>, Vec<f64>)>,
    kp_terms: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl<'a> BmfcDare<'a> {
    pub fn init(inst: &'a DareInstance, y0: DenseMatrix) -> Result<Self> {
        let x = y0.matmul(&y0.transpose());
        let ninv = inst.shift_inverse(&x)?;
        let kprime = inst.dense_k(&x, &ninv);
        let mut m = x.clone();
        m.add_scaled(-1.0, &kprime);
        m.add_scaled(-1.0, &inst.q);
        let f = m.frob_norm_sq();
        Ok(BmfcDare {
            inst,
            y: y0,
            x,
            ninv,
            kprime,
            m,
            f,
        })
    }

    fn step_terms(&self, i: usize, j: usize, delta: f64) -> Result<StepTerms> {
        let n = self.y.n_rows();
        let n1 = self.y.col(j);
        let ei = unit(n, i);
        let gei = self.inst.g.col(i);
        let gn1 = self.inst.g.matvec(&n1);
        // X ← X − δ·eᵢn₁ᵀ − δ·n₁eᵢᵀ + δ²·eᵢeᵢᵀ
        let x_terms = vec![
            (-delta, ei.clone(), n1.clone()),
            (-delta, n1.clone(), ei.clone()),
            (delta * delta, ei.clone(), ei.clone()),
        ];
        // the same correction pushed through G gives the three rank-one
        // changes of N = I + GX
        let shift_pairs = [
            (-delta, &gei, &n1),
            (-delta, &gn1, &ei),
            (delta * delta, &gei, &ei),
        ];
        // sequential Sherman-Morrison: each correction is applied against
        // the inverse accumulated so far
        let mut ninv_terms: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(3);
        for (s, u_raw, v) in shift_pairs {
            let u: Vec<f64> = u_raw.iter().map(|x| x * s).collect();
            let mut a = self.ninv.matvec(&u);
            for (c, am, bm) in &ninv_terms {
                axpy(&mut a, c * dot(bm, &u), am);
            }
            let mut b = self.ninv.matvec_transpose(v);
            for (c, am, bm) in &ninv_terms {
                axpy(&mut b, c * dot(am, v), bm);
            }
            let den = 1.0 + dot(v, &a);
            if den.abs() < 1e-12 {
                return Err(Error::SingularUpdate { denom: den });
            }
            ninv_terms.push((-1.0 / den, a, b));
        }
        // K' ← K' + AᵀX·E·A + AᵀΔX·N⁻¹_new·A with E = Σ c·abᵀ
        let mut kp_terms: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(6);
        for (c, a, b) in &ninv_terms {
            let xa = self.x.matvec(a);
            let left = self.inst.a.matvec_transpose(&xa);
            let right = self.inst.a.matvec_transpose(b);
            kp_terms.push((*c, left, right));
        }
        for (s, p, q) in &x_terms {
            let left = self.inst.a.matvec_transpose(p);
            let mut nq = self.ninv.matvec_transpose(q);
            for (c, am, bm) in &ninv_terms {
                axpy(&mut nq, c * dot(am, q), bm);
            }
            let right = self.inst.a.matvec_transpose(&nq);
            kp_terms.push((*s, left, right));
        }
        // ΔM = ΔX − ΔK'; f ← f + 2·Σ σ·gᵀMh + Σ σσ'·(gᵀg')(hᵀh')
        let mut all: Vec<(f64, &Vec<f64>, &Vec<f64>)> = Vec::with_capacity(9);
        for (s, p, q) in &x_terms {
            all.push((*s, p, q));
        }
        for (s, g, h) in &kp_terms {
            all.push((-*s, g, h));
        }
        let mut lin = 0.0;
        let mhs: Vec<Vec<f64>> = all.iter().map(|(_, _, h)| self.m.matvec(h)).collect();
        for ((s, g, _), mh) in all.iter().zip(&mhs) {
            lin += s * dot(g, mh);
        }
        let mut quad = 0.0;
        for (t1, (s1, g1, h1)) in all.iter().enumerate() {
            for (s2, g2, h2) in all.iter().skip(t1 + 1) {
                quad += 2.0 * s1 * s2 * dot(g1, g2) * dot(h1, h2);
            }
            quad += s1 * s1 * dot(g1, g1) * dot(h1, h1);
        }
        let f_new = self.f + 2.0 * lin + quad;
        Ok(StepTerms {
            f_new,
            x_terms,
            ninv_terms,
            kp_terms,
        })
    }
}

impl BmfcProblemState for BmfcDare<'_> {
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
        // grad_X f = 2M + (−I + M₃)M₂ + M₂ᵀ(−I + M₃ᵀ) with M₁ = N⁻¹
        let v = self.y.col(j);
        let mv = self.m.matvec(&v);
        let m2 = |v: &[f64]| {
            let t = self.ninv.matvec_transpose(v);
            let t = self.inst.a.matvec_transpose(&t);
            let t = self.m.matvec(&t);
            self.inst.a.matvec(&t)
        };
        let m2t = |v: &[f64]| {
            let t = self.inst.a.matvec_transpose(v);
            let t = self.m.matvec(&t);
            let t = self.inst.a.matvec(&t);
            self.ninv.matvec(&t)
        };
        let m2v = m2(&v);
        let t = self.x.matvec(&m2v);
        let t = self.ninv.matvec_transpose(&t);
        let m3m2v = self.inst.g.matvec(&t);
        let m2tv = m2t(&v);
        let t = self.inst.g.matvec(&v);
        let t = self.ninv.matvec(&t);
        let m3tv = self.x.matvec(&t);
        let m2tm3tv = m2t(&m3tv);
        let gv = 2.0 * mv[i] - m2v[i] + m3m2v[i] - m2tv[i] + m2tm3tv[i];
        2.0 * gv
    }

    fn line_search(&self, i: usize, j: usize, cfg: &BmfcConfig) -> Result<f64> {
        let g = self.partial_gradient(i, j);
        if g == 0.0 || !g.is_finite() {
            return Ok(0.0);
        }
        let sign = if g > 0.0 { 1.0 } else { -1.0 };
        let beta = cfg.armijo_beta();
        let mut t = cfg.armijo_init;
        for _ in 0..cfg.armijo_max_backtracks {
            let delta = sign * t;
            if let Ok(step) = self.step_terms(i, j, delta) {
                if step.f_new.is_finite() && step.f_new <= self.f - beta * t * g.abs() {
                    return Ok(delta);
                }
            }
            t *= cfg.armijo_shrink;
        }
        Err(Error::NoDecrease)
    }

    fn commit(&mut self, i: usize, j: usize, delta: f64) -> Result<()> {
        if delta == 0.0 {
            return Ok(());
        }
        let step = self.step_terms(i, j, delta)?;
        for (c, a, b) in &step.ninv_terms {
            self.ninv.add_outer(*c, a, b);
        }
        for (s, g, h) in &step.kp_terms {
            self.kprime.add_outer(*s, g, h);
            self.m.add_outer(-*s, g, h);
        }
        for (s, p, q) in &step.x_terms {
            self.x.add_outer(*s, p, q);
            self.m.add_outer(*s, p, q);
        }
        let yij = self.y.get(i, j);
        self.y.set(i, j, yij - delta);
        self.f = step.f_new;
        Ok(())
    }

    fn refresh(&mut self) -> Result<()> {
        self.x = self.y.matmul(&self.y.transpose());
        self.ninv = self.inst.shift_inverse(&self.x)?;
        self.kprime = self.inst.dense_k(&self.x, &self.ninv);
        self.m = self.x.clone();
        self.m.add_scaled(-1.0, &self.kprime);
        self.m.add_scaled(-1.0, &self.inst.q);
        self.f = self.m.frob_norm_sq();
        Ok(())
    }

    fn drift_report(&self) -> Result<Vec<(&'static str, f64)>> {
        let x_dense = self.y.matmul(&self.y.transpose());
        let ninv_dense = self.inst.shift_inverse(&x_dense)?;
        let k_dense = self.inst.dense_k(&x_dense, &ninv_dense);
        let mut m_dense = x_dense.clone();
        m_dense.add_scaled(-1.0, &k_dense);
        m_dense.add_scaled(-1.0, &self.inst.q);
        let f_dense = m_dense.frob_norm_sq();
        Ok(vec![
            ("X", crate::problems::rel_err(&self.x, &x_dense)),
            ("Ninv", crate::problems::rel_err(&self.ninv, &ninv_dense)),
            ("K'", crate::problems::rel_err(&self.kprime, &k_dense)),
            ("M", crate::problems::rel_err(&self.m, &m_dense)),
            ("f", (self.f - f_dense).abs() / (1.0 + f_dense)),
        ])
    }
}
