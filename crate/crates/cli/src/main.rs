//! One binary, subcommand style: generate instances, solve them, run
//! benchmark experiments, and verify candidate solutions.
//!
//! Exit codes: 0 success, 1 solver non-convergence (MaxIters/Stalled),
//! 2 usage error, 3 I/O error.

mod commands;

use clap::{Parser, Subcommand};
use commands::{bench, generate, solve, verify};

#[derive(Parser)]
#[command(
    name = "spdeq",
    about = "SPD solutions of nonlinear matrix equations (CARE, DARE, X + A'X^-1A = Q) \
             by rank-one Riemannian subspace descent",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance into a directory of Matrix Market files.
    Generate(generate::GenerateArgs),
    /// Solve an instance directory and write a JSON report (and optionally
    /// a CSV trace).
    Solve(solve::SolveArgs),
    /// Run an experiment grid described by a JSON spec file.
    Bench(bench::BenchArgs),
    /// Print the dense residual of a candidate solution.
    Verify(verify::VerifyArgs),
}

fn main() {
    // clap handles usage errors itself with exit code 2
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate::run(args),
        Command::Solve(args) => solve::run(args),
        Command::Bench(args) => bench::run(args),
        Command::Verify(args) => verify::run(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
