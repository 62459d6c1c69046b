//! Command-line front end: JSON experiment in, CSV table out.

pub mod config;
pub mod scenario;

use std::path::PathBuf;

use clap::Parser;

pub use config::ExperimentConfig;
pub use scenario::{evaluate, CurveRow, KsRow, Table};

use crate::error::Error;
use crate::mcsim::SimConfig;

/// Exit status for configuration and I/O problems.
pub const EXIT_CONFIG: i32 = 1;
/// Exit status when a series or iteration fails to converge.
pub const EXIT_CONVERGENCE: i32 = 2;
/// Exit status when the requested simulation cannot be run.
pub const EXIT_SIMULATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "corrfade",
    version,
    about = "Correlated Gamma-Gamma fading: analytic curves with Monte-Carlo checks"
)]
pub struct Args {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// CSV destination; overrides the configured output. Stdout when neither is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Simulation seed; overrides the configured one.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation trial count; overrides the configured one.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Suppress warnings and the summary line on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Numeric(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(Error::SimulationInfeasible(_)) => EXIT_SIMULATION,
            CliError::Numeric(e) if e.is_convergence() => EXIT_CONVERGENCE,
            CliError::Numeric(Error::Overflow { .. }) => EXIT_CONVERGENCE,
            CliError::Numeric(_) => EXIT_CONFIG,
        }
    }
}

/// Reads a configuration and applies the command-line overrides.
pub fn load_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    if args.seed.is_some() || args.trials.is_some() {
        let mut sim = cfg.sim.unwrap_or(SimConfig::new(1, crate::mcsim::MIN_TRIALS));
        if let Some(s) = args.seed {
            sim.seed = s;
        }
        if let Some(t) = args.trials {
            sim.trials = t;
        }
        cfg.sim = Some(sim);
    }
    Ok(cfg)
}

fn execute(args: &Args) -> Result<(String, Option<PathBuf>, usize), CliError> {
    let cfg = load_config(args)?;
    let quiet = args.quiet;
    let table = evaluate(&cfg, &mut |w| {
        if !quiet {
            eprintln!("warning: {w}");
        }
    })?;
    let rows = match &table {
        Table::Curves(r) => r.len(),
        Table::Ks(r) => r.len(),
    };
    let dest = args.output.clone().or(cfg.output.as_ref().map(PathBuf::from));
    Ok((table.to_csv(), dest, rows))
}

/// Runs the tool and returns the process exit status.
pub fn run(args: &Args) -> i32 {
    let outcome = execute(args).and_then(|(csv, dest, rows)| {
        match &dest {
            Some(path) => std::fs::write(path, csv.as_bytes())?,
            None => print!("{csv}"),
        }
        Ok((dest, rows))
    });
    match outcome {
        Ok((dest, rows)) => {
            if !args.quiet {
                if let Some(p) = dest {
                    eprintln!("wrote {rows} rows to {}", p.display());
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Numeric(Error::Truncation {
                index_cap,
                terms,
                last_increment,
                value,
            }) = &e
            {
                eprintln!("diagnostics: index_cap={index_cap} terms={terms} last_increment={last_increment:e} value={value:e}");
            }
            e.exit_code()
        }
    }
}
