//! Command-line front end for `qnet-core`: session configuration, gain-table
//! ingestion, experiment orchestration and result export.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error (including
//! infeasible decoy programs), 4 I/O error.

pub mod commands;
pub mod config;
pub mod error;
pub mod gain_table;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::RunOptions;
pub use config::{Session, SessionConfig};
pub use error::{CliError, Result};
pub use gain_table::{ingest_gain_table, parse_gain_table, write_gain_table, GainRecord};
pub use report::Format;

#[derive(Debug, Parser)]
#[command(name = "qnet", version, about = "Simulate, analyze and plan MDI-QKD networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Session configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `sim.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Comma-separated pair labels, e.g. `AB,CD`.
    #[arg(long, global = true)]
    pub pairs: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate per-pair gain tallies.
    Simulate,
    /// Finite-key analysis of a gain table, or of a fresh simulation.
    Analyze {
        /// Gain table to analyze; overrides `analysis.gain_table`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Search protocol parameters at `optimize.loss_db`.
    Optimize,
    /// Wavelength topology and time-division schedule.
    Plan,
    /// Key rate against total loss.
    Curve,
}

/// Runs one subcommand and returns the files it wrote.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let config = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let session = Session::load(&config)?;
    let input = match &cli.command {
        Command::Analyze { input } => input.clone(),
        _ => None,
    };
    let opts = RunOptions { out: cli.out, seed: cli.seed, format: cli.format, pairs: cli.pairs, input };
    match cli.command {
        Command::Simulate => commands::simulate(session, &opts),
        Command::Analyze { .. } => commands::analyze(session, &opts),
        Command::Optimize => commands::optimize(session, &opts),
        Command::Plan => commands::plan(session, &opts),
        Command::Curve => commands::curve(session, &opts),
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}
