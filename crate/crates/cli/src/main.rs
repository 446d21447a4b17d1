//! `mourre`: run diagnostic suites against the lattice and grid models and
//! write reproducible reports.

mod checks;
mod config;
mod error;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{OutputFormat, Pools};

#[derive(Parser)]
#[command(name = "mourre", version, about = "Commutator-method diagnostics for unitary operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for parallel checks (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        format: OutputFormat,
    },
    /// Print the registry of checks.
    ListChecks,
    /// Re-run the config embedded in a report and compare payloads.
    Reproduce {
        report: PathBuf,
        /// Directory for files written by the re-run (default: the report's).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run(config_path: &Path, out: Option<PathBuf>, jobs: Option<usize>, format: OutputFormat) -> Result<i32, CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let out_dir = out.unwrap_or_else(|| config.output_dir.clone());
    let report = report::execute_suite(&config, &out_dir, &Pools::new(jobs)?)?;
    report::write_outputs(&report, &out_dir, format)?;
    for c in &report.checks {
        println!("{:<28} {:<8} {:>9.3}s", c.name, format!("{:?}", c.status).to_lowercase(), c.wall_clock_s);
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(report.exit_code())
}

fn list_checks() {
    println!("{:<26} {:<9} anchor", "check", "cells");
    for c in checks::REGISTRY {
        let cells = if c.parallel { "parallel" } else { "serial" };
        println!("{:<26} {:<9} {}", c.name, cells, c.anchor);
    }
}

fn reproduce(path: &Path, out: Option<PathBuf>, jobs: Option<usize>) -> Result<i32, CliError> {
    let stored = report::load_report(path)?;
    let hash = stored.config.hash();
    if hash != stored.config_hash {
        println!("note: embedded config differs from its recorded hash; re-running the embedded config");
    }
    let out_dir = out.unwrap_or_else(|| path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
    let fresh = report::execute_suite(&stored.config, &out_dir, &Pools::new(jobs)?)?;
    if fresh.checks.len() != stored.checks.len() {
        println!("mismatch: {} checks stored, {} re-run", stored.checks.len(), fresh.checks.len());
        return Ok(3);
    }
    let diffs: Vec<String> =
        stored.checks.iter().zip(&fresh.checks).flat_map(|(a, b)| report::diff_records(a, b)).collect();
    if diffs.is_empty() {
        println!("reproduced {} checks", fresh.checks.len());
        Ok(0)
    } else {
        for d in &diffs {
            println!("mismatch: {d}");
        }
        Ok(3)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, jobs, format } => run(&config, out, jobs, format),
        Command::ListChecks => {
            list_checks();
            Ok(0)
        }
        Command::Reproduce { report, out, jobs } => reproduce(&report, out, jobs),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
