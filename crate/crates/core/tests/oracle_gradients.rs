//! Gradient-vector product oracles: central finite differences of the dense
//! residual over symmetric perturbations reconstruct the gradient each
//! workspace applies.
//!
//! The CARE gradient is maintained as `N + Nᵀ`, which is half of
//! `d‖M‖²/dX`; exact line search makes the factor immaterial, and the test
//! pins it: the finite-difference/implementation ratio must be one single
//! constant across entries (and that constant is 2). NME and DARE carry no
//! factor.

use spdeq_core::bench::{generate_instance, InstanceSpec};
use spdeq_core::densela::symmetric_eigen;
use spdeq_core::problems::{CareInstance, NmeInstance, ProblemInstance, ProblemKind};
use spdeq_core::{DenseMatrix, SpdState};

/// Symmetric-perturbation central difference of the dense residual:
/// entry `(i,j)` differentiates along `(eᵢeⱼᵀ + eⱼeᵢᵀ)/2` (and `eᵢeᵢᵀ` on
/// the diagonal), which reproduces the symmetrized gradient entrywise.
fn fd_gradient(inst: &ProblemInstance, x: &DenseMatrix, h: f64) -> DenseMatrix {
    let n = x.n_rows();
    DenseMatrix::from_fn(n, n, |i, j| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        if i == j {
            xp.set(i, i, x.get(i, i) + h);
            xm.set(i, i, x.get(i, i) - h);
        } else {
            xp.set(i, j, x.get(i, j) + 0.5 * h);
            xp.set(j, i, x.get(j, i) + 0.5 * h);
            xm.set(i, j, x.get(i, j) - 0.5 * h);
            xm.set(j, i, x.get(j, i) - 0.5 * h);
        }
        let fp = inst.dense_residual(&xp).unwrap();
        let fm = inst.dense_residual(&xm).unwrap();
        (fp - fm) / (2.0 * h)
    })
}

fn assemble_grad(ws: &dyn spdeq_core::ProblemWorkspace) -> DenseMatrix {
    let n = ws.dim();
    let mut g = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = ws.grad_apply(&e);
        for i in 0..n {
            g.set(i, j, col[i]);
        }
    }
    g
}

fn offset_x0(inst: &ProblemInstance) -> DenseMatrix {
    let mut x0 = inst.default_x0();
    for i in 0..x0.n_rows() {
        x0.set(i, i, x0.get(i, i) + 0.25 * (i as f64 + 1.0));
    }
    x0
}

#[test]
fn finite_differences_reconstruct_gradients_at_n6() {
    for (kind, cond, expect_factor) in [
        (ProblemKind::Care, 15.0, Some(2.0)),
        (ProblemKind::Dare, 15.0, None),
        (ProblemKind::Nme, 10.0, None),
    ] {
        let inst = generate_instance(&InstanceSpec::new(kind, 6, cond, 1)).unwrap();
        let x0 = offset_x0(&inst);
        let ws = inst.init_workspace(&x0).unwrap();
        let implg = assemble_grad(ws.as_ref());
        let fd = fd_gradient(&inst, &x0, 1e-5);
        // estimate the global factor from the largest entries, then check
        // per-entry agreement and per-entry factor stability
        let scale = fd.entries().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut factors = Vec::new();
        for (f, g) in fd.entries().iter().zip(implg.entries()) {
            if f.abs() > 1e-3 * scale {
                factors.push(f / g);
            }
        }
        let factor = factors.iter().sum::<f64>() / factors.len() as f64;
        assert!(factor > 0.0, "{kind:?}: factor must be positive");
        for f in &factors {
            assert!(
                (f - factor).abs() <= 1e-6 * factor.abs(),
                "{kind:?}: per-entry factor spread: {f} vs {factor}"
            );
        }
        if let Some(expected) = expect_factor {
            assert!(
                (factor - expected).abs() <= 1e-5 * expected,
                "{kind:?}: factor {factor} vs {expected}"
            );
        } else {
            assert!(
                (factor - 1.0).abs() <= 1e-5,
                "{kind:?}: factor {factor} should be 1"
            );
        }
        for (f, g) in fd.entries().iter().zip(implg.entries()) {
            assert!(
                (f - factor * g).abs() <= 1e-5 * (scale + f.abs()),
                "{kind:?}: entry {f} vs {}",
                factor * g
            );
        }
    }
}

#[test]
fn gradient_of_zero_vector_is_zero() {
    let inst = generate_instance(&InstanceSpec::new(ProblemKind::Dare, 5, 15.0, 2)).unwrap();
    let ws = inst.init_workspace(&inst.default_x0()).unwrap();
    let out = ws.grad_apply(&[0.0; 5]);
    assert!(out.iter().all(|x| *x == 0.0));
}

/// Instances built from a known solution: residual is numerically zero and
/// every gradient formula (linear in M) must vanish there.
#[test]
fn gradients_vanish_at_exact_solutions() {
    let n = 6;
    let x_star = {
        let mut m = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let bump = 0.08 * (((i * 3 + j * 5) as f64).sin());
                m.set(i, j, m.get(i, j) + bump);
            }
        }
        m.symmetrize();
        for i in 0..n {
            m.set(i, i, m.get(i, i) + 1.0);
        }
        m
    };
    let a = DenseMatrix::from_fn(n, n, |i, j| 0.1 * (((i * 7 + j) as f64) * 0.43).cos());

    // CARE: H := X*GX* − AᵀX* − X*A
    let g = {
        let mut g = DenseMatrix::identity(n);
        for i in 0..n {
            g.set(i, i, 1.0 + 0.2 * i as f64);
        }
        g
    };
    let h = {
        let xg = x_star.matmul(&g);
        let mut h = xg.matmul(&x_star);
        let atx = a.matmul_transpose_left(&x_star);
        h.add_scaled(-1.0, &atx);
        let xa = x_star.matmul(&a);
        h.add_scaled(-1.0, &xa);
        h.symmetrize();
        h
    };
    let care = ProblemInstance::Care(CareInstance::new(a.clone(), g, h).unwrap());
    let ws = care.init_workspace(&x_star).unwrap();
    assert!(ws.residual_value() <= 1e-20, "care f = {}", ws.residual_value());
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let nrm: f64 = ws.grad_apply(&e).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(nrm <= 1e-8, "care grad col {j}: {nrm:e}");
    }

    // NME: Q := X* + AᵀX*⁻¹A
    let q = {
        let state = SpdState::new(&x_star, true).unwrap();
        let xinv_a = state.xinv().unwrap().matmul(&a);
        let mut q = a.matmul_transpose_left(&xinv_a);
        q.add_scaled(1.0, &x_star);
        q.symmetrize();
        q
    };
    let nme = ProblemInstance::Nme(NmeInstance::new(a.clone(), q).unwrap());
    let ws = nme.init_workspace(&x_star).unwrap();
    assert!(ws.residual_value() <= 1e-20, "nme f = {}", ws.residual_value());
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let nrm: f64 = ws.grad_apply(&e).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(nrm <= 1e-8, "nme grad col {j}: {nrm:e}");
    }
}

/// Directional-derivative identity along an eigen-component of the
/// transformed gradient: for an exact-gradient problem (NME),
/// `[f(Exp_X(−t·λ⁽ⁱ⁾H⁽ⁱ⁾)) − f(X)]/t → −(λ⁽ⁱ⁾)²`.
#[test]
fn eigencomponent_slope_matches_rayleigh_square() {
    let inst = generate_instance(&InstanceSpec::new(ProblemKind::Nme, 5, 10.0, 3)).unwrap();
    let x0 = offset_x0(&inst);
    let ws = inst.init_workspace(&x0).unwrap();
    let state = ws.state();
    let b = state.b().to_dense();
    let grad = assemble_grad(ws.as_ref());
    let p = b.matmul_transpose_left(&grad.matmul(&b));
    let (eig, vecs) = symmetric_eigen(&p);
    // pick the dominant-magnitude eigenpair
    let idx = (0..eig.len())
        .max_by(|&a, &b| eig[a].abs().partial_cmp(&eig[b].abs()).unwrap())
        .unwrap();
    let lambda = eig[idx];
    let xvec = vecs.col(idx);
    let bx = state.b().matvec(&xvec);
    let t = 1e-6;
    // Exp_X(−tλ·Bxxᵀ Bᵀ) = X + (e^{−tλ} − 1)(Bx)(Bx)ᵀ
    let mut x_step = state.x().clone();
    x_step.add_outer((-t * lambda).exp() - 1.0, &bx, &bx);
    let f0 = ws.residual_value();
    let f1 = inst.dense_residual(&x_step).unwrap();
    let slope = (f1 - f0) / t;
    let want = -lambda * lambda;
    assert!(
        (slope - want).abs() <= 1e-4 * want.abs(),
        "slope {slope} vs {want}"
    );
}
