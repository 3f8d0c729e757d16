//! `qyao` — batch front end for protocol runs, attack statistics and
//! blindness checks.
//!
//! Exit codes: 0 accepted / success, 10 protocol abort, 64 invalid
//! configuration, 70 internal error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qyao::adversary::{AdversaryError, Mode};
use thiserror::Error;

pub const EXIT_ABORT: u8 = 10;
pub const EXIT_CONFIG: u8 = 64;
pub const EXIT_INTERNAL: u8 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Internal(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            AdversaryError::StrategyMode(_)
            | AdversaryError::UnknownVertex(_)
            | AdversaryError::Invalid(_)
            | AdversaryError::ShapeMismatch(_)
            | AdversaryError::Unsupported(_) => CliError::Config(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "qyao", version, about = "Two-party secure quantum computation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the protocol once and writes transcript and verdict.
    Run(Common),
    /// Estimates detection rates of a malicious-server strategy.
    Attack(Common),
    /// Compares the server's view of two computations.
    Blindness(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Interactive,
    Noninteractive,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads for trials; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn load(&self) -> Result<config::ExperimentConfig, CliError> {
        let mut cfg = config::ExperimentConfig::load(&self.config)?;
        cfg.seed = self.seed.or(cfg.seed);
        cfg.trials = self.trials.or(cfg.trials);
        if let Some(m) = self.mode {
            cfg.mode = Some(match m {
                ModeArg::Interactive => Mode::Interactive,
                ModeArg::Noninteractive => Mode::NonInteractive,
            });
        }
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            if j == 0 {
                return Err(CliError::Config("--jobs must be at least 1".into()));
            }
            b = b.num_threads(j);
        }
        b.build().map_err(|e| CliError::Internal(e.to_string()))
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(c) => {
            let cfg = c.load()?;
            commands::run(&cfg, &c.out)
        }
        Command::Attack(c) => {
            let cfg = c.load()?;
            c.pool()?.install(|| commands::attack(&cfg, &c.out))
        }
        Command::Blindness(c) => {
            let cfg = c.load()?;
            c.pool()?.install(|| commands::blindness(&cfg, &c.out))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qyao: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => EXIT_CONFIG,
                _ => EXIT_INTERNAL,
            })
        }
    }
}
