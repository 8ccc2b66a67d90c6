use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use accretive_cli::config::{FlagOverrides, OUT_ENV};
use accretive_cli::driver::{self, RunOutcome};
use accretive_cli::report::Status;

#[derive(Debug, Parser)]
#[command(
    name = "accretive",
    version,
    about = "Run accretive-operator experiments and write CSV/JSON reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Random seed (a `run.seed` config key takes precedence)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $ACCRETIVE_OUT, then ./results)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Multiplier applied to every acceptance tolerance
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    /// Worker threads for parallel sweeps
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario config
    Run { config: PathBuf },
    /// Run an energy balance model config
    Ebm { config: PathBuf },
    /// Print the uniqueness-criterion classification table
    Matrix,
    /// Aggregate every CSV report in a directory
    Report { dir: PathBuf },
}

fn print(outcome: &RunOutcome) {
    for r in &outcome.rows {
        let mark = match r.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        println!(
            "{:<5} {:<22} {:<48} {:.6e}",
            mark, r.scenario, r.param, r.measured
        );
    }
    let failed = outcome.rows.iter().filter(|r| !r.passed()).count();
    println!(
        "{}: {} rows, {} not passing; report in {}",
        outcome.scenario,
        outcome.rows.len(),
        failed,
        outcome.written.csv.display()
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = FlagOverrides {
        seed: cli.seed,
        out: cli.out,
        tol_scale: cli.tol_scale,
        threads: cli.threads,
    };
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    let result = match &cli.command {
        Command::Run { config } => driver::run_file(config, &flags, env_out),
        Command::Ebm { config } => driver::ebm_file(config, &flags, env_out),
        Command::Matrix => driver::matrix(&flags, env_out),
        Command::Report { dir } => driver::report(dir),
    };
    match result {
        Ok(outcome) => {
            print(&outcome);
            ExitCode::from(u8::try_from(outcome.exit_code).unwrap_or(1))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
