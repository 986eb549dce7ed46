//! The seven baseline policies on one seed of the desk preset, delayed
//! regime with peaked kernels: final cumulative regret and allocations.

use std::path::Path;

use metacub::experiment::{run_one, ExperimentConfig, SeedContext};
use metacub::types::Regime;

fn main() -> metacub::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let cfg = ExperimentConfig::load(&path)?;
    let ctx = SeedContext::build(&cfg, 0)?;
    for policy in ["ucb", "linucb", "cucb", "exp3", "mexp3", "ducb", "swucb"] {
        let run = run_one(&cfg, &ctx, Regime::Delayed, "type-i", policy)?;
        println!(
            "{policy:<7} final regret {:7.2}  allocations {:3}  disparity {:.3}",
            run.regret.final_regret(),
            run.trace.events.len(),
            run.disparity
        );
    }
    Ok(())
}
