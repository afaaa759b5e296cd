//! Manifold invariants: SPD preservation under rank-one geodesic steps, the
//! rank-one matrix-exponential identity, metric orthonormality of the
//! candidate directions, and agreement with a dense matrix-exponential
//! oracle.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spdeq_core::bench::{generate_spd_with_cond, random_orthogonal};
use spdeq_core::densela::{min_eigenvalue, symmetric_eigen, LowerTriangular};
use spdeq_core::manifold::beta_step_to_alpha;
use spdeq_core::{DenseMatrix, SpdState};

fn unit_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let nrm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut y {
        *x /= nrm;
    }
    y
}

/// Dense `exp(S)` for symmetric `S` through the Jacobi eigensolver.
fn expm_sym(s: &DenseMatrix) -> DenseMatrix {
    let (eig, vecs) = symmetric_eigen(s);
    let n = s.n_rows();
    let mut ve = vecs.clone();
    for i in 0..n {
        for j in 0..n {
            ve.set(i, j, vecs.get(i, j) * eig[j].exp());
        }
    }
    ve.matmul(&vecs.transpose())
}

#[test]
fn spd_preserved_over_many_random_steps() {
    // several hundred adversarial rank-one steps at n = 20; the dense
    // minimum eigenvalue stays positive throughout (the O(10⁴)-step n = 50
    // version runs in the acceptance suite).
    let n = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let x0 = generate_spd_with_cond(n, 10.0, &mut rng);
    let mut state = SpdState::new(&x0, true).unwrap();
    for step in 0..300 {
        let y = unit_vec(n, &mut rng);
        let alpha = -0.9 + 3.0 * rng.gen::<f64>();
        state.geodesic_update(&y, alpha).unwrap();
        // cholesky success is the SPD certificate each step
        assert!(
            LowerTriangular::cholesky(state.x()).is_ok(),
            "lost SPD at step {step}"
        );
        if step % 60 == 0 {
            assert!(min_eigenvalue(state.x()) > 0.0, "min-eig <= 0 at {step}");
        }
    }
    state.verify(1e-8).unwrap();
}

#[test]
fn geodesic_matches_dense_matrix_exponential_oracle() {
    // X' from the rank-one update equals B·exp(−λβ·yyᵀ)·Bᵀ computed with a
    // dense eigendecomposition, to 1e-12 relative (n = 4).
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let x0 = generate_spd_with_cond(n, 5.0, &mut rng);
    for trial in 0..20 {
        let mut state = SpdState::new(&x0, false).unwrap();
        let y = unit_vec(n, &mut rng);
        let lambda = -2.0 + 4.0 * rng.gen::<f64>();
        let beta = 0.05 + rng.gen::<f64>();
        let alpha = beta_step_to_alpha(lambda, beta);
        let b_dense = state.b().to_dense();
        state.geodesic_update(&y, alpha).unwrap();
        // dense oracle: B·exp(−λβ·yyᵀ)·Bᵀ
        let mut s = DenseMatrix::zeros(n, n);
        s.add_outer(-lambda * beta, &y, &y);
        let want = b_dense.matmul(&expm_sym(&s).matmul(&b_dense.transpose()));
        let rel = state.x().rel_diff(&want);
        assert!(rel <= 1e-12, "trial {trial}: {rel:e}");
    }
}

#[test]
fn candidate_directions_are_metric_orthonormal() {
    // H⁽ⁱ⁾ = B·x⁽ⁱ⁾(x⁽ⁱ⁾)ᵀ·Bᵀ from the eigenvectors of Bᵀ·G·B satisfy
    // ⟨H⁽ⁱ⁾, H⁽ʲ⁾⟩_X = δᵢⱼ under the affine-invariant metric.
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let x = generate_spd_with_cond(n, 8.0, &mut rng);
    let state = SpdState::new(&x, true).unwrap();
    let grad = {
        let mut s = DenseMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        s.symmetrize();
        s
    };
    let b = state.b().to_dense();
    let p = b.matmul_transpose_left(&grad.matmul(&b));
    let (_, vecs) = symmetric_eigen(&p);
    let xinv = state.xinv().unwrap();
    for i in 0..n {
        for j in 0..n {
            let hi = {
                let bx = state.b().matvec(&vecs.col(i));
                let mut h = DenseMatrix::zeros(n, n);
                h.add_outer(1.0, &bx, &bx);
                h
            };
            let hj = {
                let bx = state.b().matvec(&vecs.col(j));
                let mut h = DenseMatrix::zeros(n, n);
                h.add_outer(1.0, &bx, &bx);
                h
            };
            // ⟨H_i, H_j⟩_X = tr(X⁻¹ H_i X⁻¹ H_j)
            let prod = xinv.matmul(&hi).matmul(&xinv.matmul(&hj));
            let trace: f64 = (0..n).map(|k| prod.get(k, k)).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!(
                (trace - want).abs() <= 1e-10,
                "⟨H_{i}, H_{j}⟩ = {trace}"
            );
        }
    }
}

#[test]
fn line_objective_ignores_lambda_scale() {
    // the committed iterate under exact line search depends on the
    // direction y only: scaling the gradient rescales λ but leaves the
    // 1-D objective (hence the step) untouched
    use spdeq_core::bench::{generate_instance, InstanceSpec};
    use spdeq_core::manifold::DirectionEstimate;
    use spdeq_core::problems::ProblemKind;
    let inst = generate_instance(&InstanceSpec::new(ProblemKind::Nme, 6, 10.0, 2)).unwrap();
    let ws = inst.init_workspace(&inst.default_x0()).unwrap();
    let y = unit_vec(6, &mut ChaCha8Rng::seed_from_u64(47));
    let d1 = DirectionEstimate {
        y: y.clone(),
        lambda: 0.7,
    };
    let d2 = DirectionEstimate { y, lambda: 2.1 };
    let o1 = ws.line_search_objective(&d1);
    let o2 = ws.line_search_objective(&d2);
    for k in 0..100 {
        let a = -0.9 + 10.0 * k as f64 / 99.0;
        assert_eq!(o1.eval(a).to_bits(), o2.eval(a).to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// exp(c·yyᵀ) = I + (eᶜ − 1)·yyᵀ for unit y, against the dense
    /// eigendecomposition oracle over c ∈ [−5, 5].
    #[test]
    fn rank_one_exponential_identity(c in -5.0f64..5.0, seed in 0u64..1000) {
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = unit_vec(n, &mut rng);
        let mut s = DenseMatrix::zeros(n, n);
        s.add_outer(c, &y, &y);
        let dense = expm_sym(&s);
        let mut closed = DenseMatrix::identity(n);
        closed.add_outer(c.exp() - 1.0, &y, &y);
        let rel = closed.rel_diff(&dense);
        prop_assert!(rel <= 1e-11, "rel err {rel:e} at c = {c}");
    }

    /// rank-one geodesic steps with α > −1 keep the state verifiable
    #[test]
    fn random_step_sequences_keep_state_consistent(seed in 0u64..500) {
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(n, &mut rng);
        let mut x0 = q.matmul(&q.transpose());
        for i in 0..n {
            x0.set(i, i, x0.get(i, i) + 0.5 + rng.gen::<f64>());
        }
        let mut state = SpdState::new(&x0, true).unwrap();
        for _ in 0..20 {
            let y = unit_vec(n, &mut rng);
            let alpha = -0.95 + 4.0 * rng.gen::<f64>();
            state.geodesic_update(&y, alpha).unwrap();
        }
        prop_assert!(state.verify(1e-8).is_ok());
        prop_assert!(min_eigenvalue(state.x()) > 0.0);
    }
}
