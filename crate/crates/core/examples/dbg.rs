use spdeq_core::bench::{generate_instance, InstanceSpec};
use spdeq_core::problems::ProblemKind;
use spdeq_core::solver::{r1rsd_solve, SolverConfig};
use std::time::Instant;

fn main() {
    for n in [250usize, 500, 1000, 2000] {
        let t0 = Instant::now();
        let inst = generate_instance(&InstanceSpec::new(ProblemKind::Nme, n, 10.0, 1)).unwrap();
        let gen_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let cfg = SolverConfig { tol: 1e-300, max_iters: 150, rng_seed: 1, trace_stride: 150, ..SolverConfig::default() };
        let r = r1rsd_solve(&inst, &inst.default_x0(), &cfg).unwrap();
        let total = t1.elapsed().as_secs_f64();
        println!(
            "n={n}: gen {gen_s:.1}s, init+solve {total:.1}s, per-iter {:.4}s ({} iters, f {:.2e})",
            r.seconds_per_iter, r.iterations, r.final_residual
        );
    }
}
