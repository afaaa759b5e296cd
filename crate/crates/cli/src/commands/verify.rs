use super::CliError;
use clap::Args;
use spdeq_core::bench::read_instance_dir;
use spdeq_core::densela::mm;
use std::path::PathBuf;

#[derive(Args)]
pub struct VerifyArgs {
    /// Instance directory
    #[arg(long)]
    instance: PathBuf,
    /// Candidate solution (Matrix Market)
    #[arg(long)]
    x: PathBuf,
}

pub fn run(args: VerifyArgs) -> Result<i32, CliError> {
    let (inst, _) = read_instance_dir(&args.instance)?;
    let x = mm::read_matrix_market(&args.x)?;
    let f = inst
        .dense_residual(&x)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("dense_residual {:.17e}", f);
    Ok(0)
}
