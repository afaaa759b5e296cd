//! O(n²) kernel microbenchmarks: dense/triangular matvecs, triangular
//! solves, and the rank-one factor/inverse updates.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdeq_core::bench::generate_spd_with_cond;
use spdeq_core::densela::{rank_one_inverse_update, LowerTriangular};

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernels");
    for &n in &[128usize, 512] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = generate_spd_with_cond(n, 10.0, &mut rng);
        let b = LowerTriangular::cholesky(&x).unwrap();
        let xinv = b.inverse_spd();
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let unit: Vec<f64> = {
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / nrm).collect()
        };

        group.bench_with_input(BenchmarkId::new("sym_matvec", n), &n, |bch, _| {
            bch.iter(|| black_box(x.matvec(black_box(&v))))
        });
        group.bench_with_input(BenchmarkId::new("tri_matvec", n), &n, |bch, _| {
            bch.iter(|| black_box(b.matvec(black_box(&unit))))
        });
        group.bench_with_input(BenchmarkId::new("tri_solve", n), &n, |bch, _| {
            bch.iter(|| black_box(b.solve(black_box(&v), true)))
        });
        group.bench_with_input(BenchmarkId::new("chol_rank_one_update", n), &n, |bch, _| {
            // alternate up/down so the factor stays near the original
            bch.iter(|| {
                let mut bb = b.clone();
                bb.rank_one_update(black_box(&v), 1e-3).unwrap();
                black_box(bb)
            })
        });
        group.bench_with_input(BenchmarkId::new("inverse_update", n), &n, |bch, _| {
            bch.iter(|| {
                let mut xi = xinv.clone();
                rank_one_inverse_update(&mut xi, black_box(&v), 1e-3).unwrap();
                black_box(xi)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
