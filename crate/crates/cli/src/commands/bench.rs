use super::CliError;
use clap::Args;
use spdeq_core::bench::{run_experiment, ExperimentSpec};
use std::path::PathBuf;

#[derive(Args)]
pub struct BenchArgs {
    /// Experiment spec (JSON: instances, algorithms, repetitions, output_dir)
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; overrides the spec's output_dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent cells
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

pub fn run(args: BenchArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.spec)?;
    let mut spec: ExperimentSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("spec file: {e}")))?;
    if let Some(out) = args.out {
        spec.output_dir = out;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = run_experiment(&spec, args.jobs)?;
    println!(
        "{} runs -> {}",
        rows.len(),
        spec.output_dir.join("aggregate.csv").display()
    );
    Ok(0)
}
