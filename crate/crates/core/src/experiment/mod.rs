//! Experiment orchestration: config parsing, the seeded
//! (regime × kernel × policy × seed) grid, CSV reports, SVG plots and
//! the audit over a written allocation log.
//!
//! Grid cells run on a rayon pool whose size comes from the config or the
//! `METACUB_WORKERS` variable. Results are sorted by run key before any
//! file is written, so the thread count never changes the output bytes.

mod audit;
mod config;
mod plot;
mod report;
mod runner;

use std::path::{Path, PathBuf};

pub use audit::{audit_allocations, audit_command, AuditReport};
pub use config::{
    CsvSource, DatasetConfig, ExperimentConfig, KernelSpec, MixtureComponent, ResourceConfig, IMMEDIATE_KERNEL, SCHEMA,
};
pub use plot::{kernel_svg, read_kernels, regret_bands, regret_svg, render_plots, Band, RegretBands};
pub use report::{mean_fairness, write_reports, REPORT_FILES};
pub use runner::{run_episode, run_grid, run_one, EpisodeTrace, GridOutput, RunKey, RunResult, SeedContext};

use crate::data::{generate_synthetic, write_csv, SyntheticSpec};
use crate::error::{Error, Result};

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub grid: GridOutput,
}

/// Run the grid and write every report. Constraint violations in any trace
/// turn into an error naming the allocation log, after the files are
/// written so the trace can be inspected.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = run_grid(cfg)?;
    let files = write_reports(&cfg.output_dir, cfg, &grid)?;
    let count: usize = grid.runs.iter().map(|r| r.violations.len()).sum();
    if count > 0 {
        return Err(Error::Audit { count, path: cfg.output_dir.join("allocations.csv") });
    }
    Ok(ExperimentReport { output_dir: cfg.output_dir.clone(), files, grid })
}

/// Generate a synthetic dataset from a TOML spec and write it as CSV.
pub fn synth_command(spec_path: &Path, out: &Path) -> Result<usize> {
    let spec: SyntheticSpec = toml::from_str(&std::fs::read_to_string(spec_path)?)?;
    let data = generate_synthetic(&spec)?;
    write_csv(out, &data.dataset)?;
    Ok(data.dataset.rows.len())
}
