//! The experiment grid from the desk preset, cut to three seeds: runs
//! every policy in every regime and kernel family, writes the reports and
//! renders the plots. Pass an output directory to keep the files.

use std::path::{Path, PathBuf};

use metacub::experiment::{audit_command, render_plots, run_experiment, ExperimentConfig};

fn main() -> metacub::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("metacub_grid"), PathBuf::from);
    let cfg = ExperimentConfig { seeds: vec![0, 1, 2], output_dir: out, ..ExperimentConfig::load(&path)? };
    let report = run_experiment(&cfg)?;
    println!("{} runs written to {}", report.grid.runs.len(), report.output_dir.display());
    print!("{}", std::fs::read_to_string(report.output_dir.join("summary.csv"))?);
    println!("audit: {}", audit_command(&report.output_dir)?.render().trim_end());
    for p in render_plots(&report.output_dir)? {
        println!("plot {}", p.display());
    }
    Ok(())
}
