//! Command-line front end for the QD-cavity single-photon source
//! simulator: config-driven parameter sweeps, trajectory dumps and the
//! self-check suite, all emitting CSV with a provenance block.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{Config, TableMode};
use crate::error::{CliError, CliResult};
use crate::output::Table;

#[derive(Debug, Parser)]
#[command(
    name = "spsim",
    version,
    about = "Simulates a quantum-dot cavity single-photon source: closed-form \
             rate model plus a Lindblad master-equation engine"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    /// Evaluate at the dephasing-table nodes only.
    Nodes,
    /// Interpolate the table on a regular temperature grid.
    Interp,
}

impl From<ModeArg> for TableMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Nodes => TableMode::Nodes,
            ModeArg::Interp => TableMode::Interp,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Path to the TOML config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Write the CSV here (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a minimal SVG line plot next to --out.
    #[arg(long)]
    pub svg: bool,
    /// Temperature handling override: table nodes or interpolation.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Path to the TOML config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Write the CSV here (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a minimal SVG line plot next to --out.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Dephasing table CSV to use for the temperature-trend checks
    /// (defaults to the built-in InGaAs data).
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cavity loss rates and coupling strength versus mode volume.
    GeometrySweep(SweepArgs),
    /// Single-photon efficiency versus loss rates or temperature.
    EfficiencySweep(SweepArgs),
    /// Effective transfer rate versus temperature.
    TransferRateSweep(SweepArgs),
    /// Generalized Purcell factor versus temperature.
    PurcellSweep(SweepArgs),
    /// Integrate the master equation and dump the trajectory.
    Dynamics(DynamicsArgs),
    /// Run the full self-check suite; nonzero exit on any failure.
    Validate(ValidateArgs),
}

/// Run a parsed command line; the returned code is the process exit code.
pub fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::GeometrySweep(args) => {
            let config = Config::load(&args.config)?;
            emit(&args, commands::geometry_sweep(&config)?)
        }
        Command::EfficiencySweep(args) => {
            let config = Config::load(&args.config)?;
            let table = commands::efficiency_sweep(&config, args.mode.map(Into::into))?;
            emit(&args, table)
        }
        Command::TransferRateSweep(args) => {
            let config = Config::load(&args.config)?;
            let table = commands::transfer_rate_sweep(&config, args.mode.map(Into::into))?;
            emit(&args, table)
        }
        Command::PurcellSweep(args) => {
            let config = Config::load(&args.config)?;
            let table = commands::purcell_sweep(&config, args.mode.map(Into::into))?;
            emit(&args, table)
        }
        Command::Dynamics(args) => {
            let config = Config::load(&args.config)?;
            let table = commands::dynamics(&config)?;
            write_outputs(&table, args.out.as_deref(), args.svg)
        }
        Command::Validate(args) => {
            let results = commands::validate(args.table.as_deref())?;
            let mut all_passed = true;
            for r in &results {
                println!("{}", r.summary_line());
                all_passed &= r.passed;
            }
            let passed = results.iter().filter(|r| r.passed).count();
            println!(
                "{}: {passed}/{} checks passed",
                if all_passed { "OK" } else { "FAILED" },
                results.len()
            );
            Ok(if all_passed { 0 } else { 1 })
        }
    }
}

fn emit(args: &SweepArgs, table: Table) -> CliResult<u8> {
    write_outputs(&table, args.out.as_deref(), args.svg)
}

fn write_outputs(table: &Table, out: Option<&std::path::Path>, svg: bool) -> CliResult<u8> {
    if table.skipped > 0 {
        log::warn!(
            "{}: {} sweep point(s) skipped (parameters outside the valid domain)",
            table.command,
            table.skipped
        );
    }
    let csv = table.to_csv();
    match out {
        Some(path) => {
            std::fs::write(path, &csv)
                .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
            if svg {
                let svg_path = path.with_extension("svg");
                std::fs::write(&svg_path, table.to_svg()).map_err(|e| {
                    CliError::runtime(format!("cannot write {}: {e}", svg_path.display()))
                })?;
            }
        }
        None => {
            if svg {
                return Err(CliError::config("--svg requires --out"));
            }
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| CliError::runtime(format!("stdout: {e}")))?;
        }
    }
    Ok(0)
}
