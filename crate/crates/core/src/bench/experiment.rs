//! Experiment orchestration: run a grid of (instance × algorithm ×
//! repetition) cells, write per-run reports and traces, and aggregate a
//! summary CSV.

use super::{
    generate_instance, instance_content_hash, write_instance_dir, AlgorithmConfig, InstanceSpec,
};
use crate::bmfc::bmfc_solve;
use crate::error::{Error, Result};
use crate::problems::ProblemKind;
use crate::solver::{r1rsd_solve, write_report, write_trace_csv, SolveReport};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// A full experiment: the instance grid, the algorithm list, and how many
/// repetitions of each cell (repetition k bumps the solver seed by k).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub instances: Vec<InstanceSpec>,
    pub algorithms: Vec<AlgorithmConfig>,
    pub repetitions: usize,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidInput(
                "experiment needs at least one instance and one algorithm".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidInput("repetitions must be >= 1".into()));
        }
        for spec in &self.instances {
            spec.validate()?;
        }
        Ok(())
    }
}

/// One row of the aggregate CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateRow {
    pub kind: ProblemKind,
    pub n: usize,
    pub algo: String,
    pub eps: f64,
    pub iters: u64,
    pub seconds: f64,
    pub final_residual: f64,
    pub seed: u64,
}

impl AggregateRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:e},{},{:e},{:e},{}",
            self.kind.as_str(),
            self.n,
            self.algo,
            self.eps,
            self.iters,
            self.seconds,
            self.final_residual,
            self.seed
        )
    }
}

#[derive(Serialize)]
struct ExperimentManifest<'a> {
    spec: &'a ExperimentSpec,
    instance_hashes: Vec<String>,
}

/// Run every cell, write `report_*.json` + `trace_*.csv` per run plus
/// `aggregate.csv` and `experiment.json` (spec echo + instance content
/// hashes). Cells are dispatched to `jobs` workers; rows come back in
/// deterministic grid order regardless of scheduling. Solver stalls are
/// recorded in the rows, not raised; I/O failures abort.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<AggregateRow>> {
    spec.validate()?;
    let out = &spec.output_dir;
    std::fs::create_dir_all(out)?;

    // materialize instances once, hashing their files for the manifest
    let mut instance_hashes = Vec::with_capacity(spec.instances.len());
    let mut instances = Vec::with_capacity(spec.instances.len());
    for inst_spec in &spec.instances {
        let inst = generate_instance(inst_spec)?;
        let dir = out.join(format!(
            "instances/{}_{}_s{}",
            inst_spec.kind.as_str(),
            inst_spec.n,
            inst_spec.seed
        ));
        write_instance_dir(&dir, &inst, inst_spec)?;
        instance_hashes.push(instance_content_hash(&dir, inst_spec.kind)?);
        instances.push(inst);
    }
    {
        let manifest = ExperimentManifest {
            spec,
            instance_hashes,
        };
        let file = std::fs::File::create(out.join("experiment.json"))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &manifest)?;
    }

    // cell grid in deterministic order
    struct Cell {
        index: usize,
        inst_idx: usize,
        algo_idx: usize,
        rep: usize,
    }
    let mut cells = Vec::new();
    for (inst_idx, _) in spec.instances.iter().enumerate() {
        for (algo_idx, _) in spec.algorithms.iter().enumerate() {
            for rep in 0..spec.repetitions {
                cells.push(Cell {
                    index: cells.len(),
                    inst_idx,
                    algo_idx,
                    rep,
                });
            }
        }
    }

    let results: Mutex<Vec<Option<(AggregateRow, PathBuf, PathBuf, SolveReport)>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    let errors: Mutex<Vec<Error>> = Mutex::new(Vec::new());
    let next: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);

    let worker = |_worker_id: usize| loop {
        let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        if k >= cells.len() {
            break;
        }
        let cell = &cells[k];
        let inst_spec = &spec.instances[cell.inst_idx];
        let inst = &instances[cell.inst_idx];
        let algo = &spec.algorithms[cell.algo_idx];
        let run = || -> Result<(AggregateRow, PathBuf, PathBuf, SolveReport)> {
            let report = match algo {
                AlgorithmConfig::R1rsd(cfg) => {
                    let mut cfg = cfg.clone();
                    cfg.rng_seed = cfg.rng_seed.wrapping_add(cell.rep as u64);
                    r1rsd_solve(inst, &inst.default_x0(), &cfg)?
                }
                AlgorithmConfig::Bmfc(cfg) => {
                    let mut cfg = cfg.clone();
                    cfg.rng_seed = cfg.rng_seed.wrapping_add(cell.rep as u64);
                    bmfc_solve(inst, None, &cfg)?
                }
            };
            let stem = format!(
                "{}_{}_{}_s{}_r{}",
                inst_spec.kind.as_str(),
                inst_spec.n,
                algo.name(),
                inst_spec.seed,
                cell.rep
            );
            let report_path = spec.output_dir.join(format!("report_{stem}.json"));
            let trace_path = spec.output_dir.join(format!("trace_{stem}.csv"));
            let row = AggregateRow {
                kind: inst_spec.kind,
                n: inst_spec.n,
                algo: algo.name().to_string(),
                eps: algo.tol(),
                iters: report.iterations,
                seconds: report.total_seconds(),
                final_residual: report.final_residual,
                seed: inst_spec.seed,
            };
            Ok((row, report_path, trace_path, report))
        };
        match run() {
            Ok(done) => results.lock().expect("results lock")[cell.index] = Some(done),
            Err(e) => errors.lock().expect("errors lock").push(e),
        }
    };

    let jobs = jobs.max(1).min(cells.len().max(1));
    if jobs <= 1 {
        worker(0);
    } else {
        std::thread::scope(|scope| {
            let worker = &worker;
            for w in 0..jobs {
                scope.spawn(move || worker(w));
            }
        });
    }

    if let Some(e) = errors.lock().expect("errors lock").pop() {
        return Err(e);
    }
    let results = results.into_inner().expect("results lock");
    let mut rows = Vec::with_capacity(results.len());
    for slot in results {
        let (row, report_path, trace_path, report) =
            slot.expect("every cell produced a result");
        write_report(&report, &report_path)?;
        write_trace_csv(&report, &trace_path)?;
        rows.push(row);
    }
    write_aggregate_csv(&out.join("aggregate.csv"), &rows)?;
    Ok(rows)
}

/// `kind,n,algo,eps,iters,seconds,final_residual,seed` per solve.
pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "kind,n,algo,eps,iters,seconds,final_residual,seed")?;
    for row in rows {
        writeln!(w, "{}", row.csv_line())?;
    }
    w.flush()?;
    Ok(())
}
