use super::CliError;
use clap::Args;
use serde::Deserialize;
use spdeq_core::bench::read_instance_dir;
use spdeq_core::bmfc::{bmfc_solve, BmfcConfig, CoordinateStrategy};
use spdeq_core::densela::mm;
use spdeq_core::solver::{
    r1rsd_solve, write_report, write_trace_csv, SolverConfig, StepStrategy, Termination,
};
use std::path::PathBuf;

#[derive(Args)]
pub struct SolveArgs {
    /// Instance directory (from `spdeq generate`)
    #[arg(long)]
    instance: PathBuf,
    /// r1rsd | bmfc
    #[arg(long, default_value = "r1rsd")]
    algo: String,
    /// Optional JSON file supplying any of the flags below; explicit
    /// command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stop when f(X) <= tol
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trace_stride: Option<u64>,
    #[arg(long)]
    refresh_period: Option<u64>,
    /// r1rsd: power iterations per step
    #[arg(long)]
    power_iters: Option<usize>,
    /// r1rsd step strategy: exact | fixed | armijo
    #[arg(long)]
    step: Option<String>,
    /// fixed-step β (α = exp(−λβ) − 1); used with --step fixed
    #[arg(long)]
    beta: Option<f64>,
    /// literal fixed α; used with --step fixed (instead of --beta)
    #[arg(long)]
    alpha: Option<f64>,
    /// r1rsd line-search interval
    #[arg(long)]
    search_lo: Option<f64>,
    #[arg(long)]
    search_hi: Option<f64>,
    /// bmfc coordinate order: cyclic | with-replacement
    #[arg(long)]
    strategy: Option<String>,
    /// Custom initial iterate (Matrix Market); defaults to I (CARE) or Q
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Report JSON path
    #[arg(long)]
    report: Option<PathBuf>,
    /// Trace CSV path
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// The file-supplied subset of flags.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    tol: Option<f64>,
    max_iters: Option<u64>,
    seed: Option<u64>,
    trace_stride: Option<u64>,
    refresh_period: Option<u64>,
    power_iters: Option<usize>,
    step: Option<String>,
    beta: Option<f64>,
    alpha: Option<f64>,
    search_lo: Option<f64>,
    search_hi: Option<f64>,
    strategy: Option<String>,
}

pub fn run(args: SolveArgs) -> Result<i32, CliError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config file: {e}")))?
        }
        None => FileConfig::default(),
    };
    let (inst, _manifest) = read_instance_dir(&args.instance)?;
    let x0 = match &args.x0 {
        Some(path) => mm::read_matrix_market(path)?,
        None => inst.default_x0(),
    };

    let tol = args.tol.or(file.tol).unwrap_or(1e-6);
    let max_iters = args.max_iters.or(file.max_iters).unwrap_or(200_000);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let trace_stride = args.trace_stride.or(file.trace_stride).unwrap_or(1);
    let refresh_period = args.refresh_period.or(file.refresh_period).unwrap_or(1000);

    let report = match args.algo.as_str() {
        "r1rsd" => {
            let step = match args
                .step
                .or(file.step)
                .unwrap_or_else(|| "exact".into())
                .as_str()
            {
                "exact" => StepStrategy::ExactLineSearch,
                "fixed" => match (args.beta.or(file.beta), args.alpha.or(file.alpha)) {
                    (Some(beta), None) => StepStrategy::FixedBeta { beta },
                    (None, Some(alpha)) => StepStrategy::FixedAlpha { alpha },
                    (None, None) => {
                        return Err(CliError::Usage(
                            "--step fixed needs --beta or --alpha".into(),
                        ))
                    }
                    (Some(_), Some(_)) => {
                        return Err(CliError::Usage(
                            "--beta and --alpha are mutually exclusive".into(),
                        ))
                    }
                },
                "armijo" => StepStrategy::Armijo {
                    beta: args.beta.or(file.beta).unwrap_or(0.01),
                    shrink: 0.5,
                    init: 1.0,
                    max_backtracks: 60,
                },
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown step strategy {other:?} (exact | fixed | armijo)"
                    )))
                }
            };
            let config = SolverConfig {
                power_iters: args.power_iters.or(file.power_iters).unwrap_or(10),
                step,
                tol,
                max_iters,
                refresh_period,
                rng_seed: seed,
                search_interval: (
                    args.search_lo.or(file.search_lo).unwrap_or(-0.99),
                    args.search_hi.or(file.search_hi).unwrap_or(10.0),
                ),
                trace_stride,
            };
            config
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            r1rsd_solve(&inst, &x0, &config)?
        }
        "bmfc" => {
            let strategy = match args
                .strategy
                .or(file.strategy)
                .unwrap_or_else(|| "cyclic".into())
                .as_str()
            {
                "cyclic" => CoordinateStrategy::Cyclic,
                "with-replacement" | "with_replacement" => CoordinateStrategy::WithReplacement,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown strategy {other:?} (cyclic | with-replacement)"
                    )))
                }
            };
            let config = BmfcConfig {
                strategy,
                tol,
                max_iters,
                rng_seed: seed,
                trace_stride,
                refresh_period,
                ..BmfcConfig::default()
            };
            bmfc_solve(&inst, None, &config)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown algorithm {other:?} (r1rsd | bmfc)"
            )))
        }
    };

    if let Some(path) = &args.report {
        write_report(&report, path)?;
    }
    if let Some(path) = &args.trace {
        write_trace_csv(&report, path)?;
    }
    println!(
        "{}: {:?} after {} iterations, f = {:e} (d0 = {:e})",
        report.algorithm, report.termination, report.iterations, report.final_residual, report.d0
    );
    Ok(match report.termination {
        Termination::Converged => 0,
        Termination::MaxIters | Termination::Stalled => 1,
    })
}
