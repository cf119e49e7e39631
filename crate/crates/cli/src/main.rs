//! `ripple` — influence inference for multivariate event streams.
//!
//! Subcommands tie the pipeline together: `simulate` draws synthetic event
//! streams with known ground truth, `fit` estimates model parameters from
//! an event file, `score` computes responsiveness for a voice pair,
//! `network` exports the influence graph, `evaluate` scores an inferred
//! network against causal ground truth, and `validate` audits an event
//! file. Every artifact-producing run writes a manifest with content
//! hashes, so identical inputs and seeds reproduce identical outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod io;
mod manifest;

/// Error taxonomy mapped onto exit codes: usage/config problems exit 1,
/// data validation failures exit 2, numerical failures exit 3, and internal
/// invariant violations exit 4.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ripple",
    version,
    about = "Directed-influence inference for multivariate event streams"
)]
struct Cli {
    /// Suppress progress output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an event stream from known parameters, with a causal
    /// parentage sidecar.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate model parameters from an event file.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute responsiveness for the configured voice pair.
    Score {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Export the influence network as a weighted edge list.
    Network {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Drop edges below this interval mass.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Score an inferred network against ground-truth causal patterns.
    Evaluate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        parentage: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Comma-separated ascending thresholds, e.g. "0,0.5,1.0".
        #[arg(long)]
        thresholds: Option<String>,
    },
    /// Audit an event file and report every invariant violation.
    Validate {
        #[arg(long)]
        events: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = commands::Ctx { quiet: cli.quiet };
    let result = match &cli.command {
        Command::Simulate {
            config,
            out_dir,
            seed,
        } => commands::run_simulate(&ctx, config, out_dir, *seed),
        Command::Fit {
            config,
            events,
            out_dir,
            seed,
        } => commands::run_fit(&ctx, config, events, out_dir, *seed),
        Command::Score {
            config,
            events,
            model,
            out_dir,
        } => commands::run_score(&ctx, config, events, model, out_dir),
        Command::Network {
            config,
            events,
            model,
            out_dir,
            threshold,
        } => commands::run_network(&ctx, config.as_deref(), events, model, out_dir, *threshold),
        Command::Evaluate {
            config,
            network,
            events,
            parentage,
            out_dir,
            thresholds,
        } => commands::run_evaluate(
            &ctx,
            config.as_deref(),
            network,
            events,
            parentage,
            out_dir,
            thresholds.as_deref(),
        ),
        Command::Validate { events } => commands::run_validate(&ctx, events),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
