use super::CliError;
use clap::Args;
use spdeq_core::bench::{generate_instance, write_instance_dir, InstanceSpec};
use spdeq_core::problems::ProblemKind;
use std::path::PathBuf;

#[derive(Args)]
pub struct GenerateArgs {
    /// Equation kind: care | dare | nme
    #[arg(long)]
    kind: String,
    /// Dimension
    #[arg(long)]
    n: usize,
    /// Condition-number target for the coefficient matrices
    #[arg(long, default_value_t = 15.0)]
    cond: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if absent)
    #[arg(long)]
    out: PathBuf,
    /// NME solvability margin: |A|₂ <= margin·λ_min(Q)
    #[arg(long, default_value_t = 0.5)]
    margin: f64,
}

pub fn run(args: GenerateArgs) -> Result<i32, CliError> {
    let kind: ProblemKind = args
        .kind
        .parse()
        .map_err(|e: spdeq_core::Error| CliError::Usage(e.to_string()))?;
    let mut spec = InstanceSpec::new(kind, args.n, args.cond, args.seed);
    spec.solvability_margin = args.margin;
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let inst = generate_instance(&spec)?;
    write_instance_dir(&args.out, &inst, &spec)?;
    println!(
        "wrote {} instance (n = {}, cond <= {}, seed {}) to {}",
        kind.as_str(),
        args.n,
        args.cond,
        args.seed,
        args.out.display()
    );
    Ok(0)
}
