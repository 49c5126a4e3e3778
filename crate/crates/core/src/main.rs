//! Command-line front end: every study is a reproducible run driven by a
//! JSON config, emitting CSV. Exit status: 0 = ran and all assertions hold,
//! 2 = ran with flagged failures, 64 = config error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use nnop::cli::{self, exit_code_for, CmdOutcome, EXIT_CONFIG, EXIT_FLAGGED, EXIT_OK};
use nnop::config::RunConfig;
use nnop::error::Result;

#[derive(Parser)]
#[command(
    name = "nnop",
    about = "NN operators from sigmoidal activations: moments, Strang-Fix checks, \
             simultaneous approximation and Voronovskaja studies"
)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the deterministic grid jitter in sup estimation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress per-file progress notes.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Truncated and algebraic kernel moments.
    Moments,
    /// Strang-Fix verification: Fourier zeros and moment constancy.
    Strangfix,
    /// Operator values and derivatives on a plot grid.
    Eval,
    /// Sup-error convergence study with empirical orders and bounds.
    Converge,
    /// Scaled residuals against the Voronovskaja limit.
    Voronovskaja,
    /// Theoretical simultaneous-approximation bounds alone.
    Bound,
}

fn load_config(args: &Args) -> Result<RunConfig> {
    match &args.config {
        Some(path) => RunConfig::from_path(path),
        None => {
            let cfg = RunConfig::default();
            cfg.validate()?;
            Ok(cfg)
        }
    }
}

fn run(args: &Args, cfg: &RunConfig) -> Result<CmdOutcome> {
    match args.cmd {
        Cmd::Moments => cli::cmd_moments(cfg, &args.out),
        Cmd::Strangfix => cli::cmd_strangfix(cfg, &args.out),
        Cmd::Eval => cli::cmd_eval(cfg, &args.out),
        Cmd::Converge => cli::cmd_converge(cfg, &args.out, args.seed),
        Cmd::Voronovskaja => cli::cmd_voronovskaja(cfg, &args.out),
        Cmd::Bound => cli::cmd_bound(cfg, &args.out),
    }
}

fn main() {
    let args = Args::parse();
    let cfg = match load_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(EXIT_CONFIG);
        }
    };
    match run(&args, &cfg) {
        Ok(outcome) => {
            if !args.quiet {
                for file in &outcome.files {
                    println!("wrote {}", file.display());
                }
                for note in &outcome.notes {
                    println!("{note}");
                }
            }
            std::process::exit(if outcome.flagged { EXIT_FLAGGED } else { EXIT_OK });
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    }
}
