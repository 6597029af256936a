//! Command-line front end: bound sweeps and maps, closed-form tables,
//! estimator benchmarks, field probes and a numerical self-check.

pub mod commands;
pub mod config;
pub mod output;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::cpl_table::CplTableArgs;
use commands::crb_distance::CrbDistanceArgs;
use commands::crb_map::CrbMapArgs;
use commands::crb_sweep::CrbSweepArgs;
use commands::field_probe::FieldProbeArgs;
use commands::mle_benchmark::MleBenchmarkArgs;
use commands::validate::ValidateArgs;

#[derive(Debug, Parser)]
#[command(name = "holocrb", version, about = "Cramér-Rao bounds and estimators for locating a dipole from surface field measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RCRBs against the surface side length.
    CrbSweep(CrbSweepArgs),
    /// Unknown-orientation RCRBs over (y_C, z_C), normalized to the minimum.
    CrbMap(CrbMapArgs),
    /// RCRBs against the source distance for several wavelengths.
    CrbDistance(CrbDistanceArgs),
    /// Closed-form integrals, bounds, Fisher entries and CRBs per ρ.
    CplTable(CplTableArgs),
    /// Monte-Carlo RMSE of the maximum-likelihood estimators.
    MleBenchmark(MleBenchmarkArgs),
    /// Field of every model at one point.
    FieldProbe(FieldProbeArgs),
    /// Numerical self-check; exits non-zero on any failure.
    Validate(ValidateArgs),
}

/// Runs one command; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let (table, out) = match &cli.command {
        Command::CrbSweep(a) => (commands::crb_sweep::table(a)?, &a.io.out),
        Command::CrbMap(a) => (commands::crb_map::table(a)?, &a.io.out),
        Command::CrbDistance(a) => (commands::crb_distance::table(a)?, &a.io.out),
        Command::CplTable(a) => (commands::cpl_table::table(a)?, &a.io.out),
        Command::MleBenchmark(a) => (commands::mle_benchmark::table(a)?, &a.io.out),
        Command::FieldProbe(a) => (commands::field_probe::table(a)?, &a.io.out),
        Command::Validate(a) => return Ok(if commands::validate::run(a)? { 0 } else { 1 }),
    };
    table.write(out.as_deref())?;
    Ok(0)
}
