//! Command-line front end. Exit status: 0 on pass, 1 when a check fails, 2 on error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maxwell_stefan::app::{self, Sweep};
use maxwell_stefan::config::RunConfig;

#[derive(Parser)]
#[command(name = "mstefan", version, about = "Maxwell-Stefan finite-difference runs and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file; the built-in three-species 1D setup when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configured one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks, overriding the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Time-step the configured problem and audit the run.
    Run,
    /// Spatial refinement study.
    ConvergeSpace,
    /// Temporal refinement study.
    ConvergeTime,
    /// Property suite.
    Verify,
    /// Truncation errors on the two-species heat mode.
    Truncation,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> maxwell_stefan::Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::parse("")?,
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cfg.out_dir.clone();
    let q = cli.quiet;
    Ok(match cli.command {
        Command::Run => app::run(&cfg, &out, q)?.passed(),
        Command::ConvergeSpace => app::converge(&cfg, Sweep::Space, &out, q).map(|_| true)?,
        Command::ConvergeTime => app::converge(&cfg, Sweep::Time, &out, q).map(|_| true)?,
        Command::Verify => app::verify(&cfg, cfg.seed, &out, q)?.iter().all(|o| o.passed),
        Command::Truncation => app::truncation(&cfg, &out, q)?.passed(),
    })
}
