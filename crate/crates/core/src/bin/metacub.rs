//! Command-line front end over the experiment API.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metacub::experiment::{audit_command, render_plots, run_experiment, synth_command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "metacub", version, about = "Bi-level budgeted allocation with delayed feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid and write reports.
    Run { config: PathBuf },
    /// Render SVG regret and kernel plots from a report directory.
    Plot { report_dir: PathBuf },
    /// Check a report's allocation log against its constraints.
    Audit { report_dir: PathBuf },
    /// Write a synthetic dataset described by a TOML spec.
    Synth { spec: PathBuf, out: PathBuf },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> metacub::Result<ExitCode> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let workers = match cfg.effective_workers() {
                0 => rayon::current_num_threads(),
                w => w,
            };
            let report = run_experiment(&cfg)?;
            println!(
                "{} runs on {workers} workers written to {}",
                report.grid.runs.len(),
                report.output_dir.display()
            );
        }
        Command::Plot { report_dir } => {
            for p in render_plots(&report_dir)? {
                println!("{}", p.display());
            }
        }
        Command::Audit { report_dir } => {
            let report = audit_command(&report_dir)?;
            print!("{}", report.render());
            if !report.is_clean() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Synth { spec, out } => {
            let n = synth_command(&spec, &out)?;
            println!("{n} rows written to {}", out.display());
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let runs = cfg.cells().len() * cfg.policies.len() * cfg.seeds.len();
            println!("ok: {runs} runs over {} grid cells", cfg.cells().len());
        }
    }
    Ok(ExitCode::SUCCESS)
}
