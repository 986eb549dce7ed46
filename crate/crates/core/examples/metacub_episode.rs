//! One MetaCUB episode next to flat ccucb on the desk preset: the
//! meta-policy deployed for each cohort, regret, and group fairness ratios.

use std::path::Path;

use metacub::experiment::{run_one, ExperimentConfig, SeedContext};
use metacub::types::Regime;

fn main() -> metacub::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let cfg = ExperimentConfig::load(&path)?;
    let ctx = SeedContext::build(&cfg, 3)?;
    for policy in ["ccucb", "metacub"] {
        let run = run_one(&cfg, &ctx, Regime::Delayed, "type-i", policy)?;
        let ratios = run.fairness.as_ref().map(|f| f.ratios()).unwrap_or_default();
        let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
        println!(
            "{policy:<8} regret {:6.2}  allocations {:3}  fairness [{}]  disparity {:.3}",
            run.regret.final_regret(),
            run.trace.events.len(),
            shown.join(", "),
            run.disparity
        );
        for m in &run.trace.meta {
            let cells: Vec<String> = m.deployed.cells().iter().map(|c| format!("{c:.2}")).collect();
            println!("  cohort {}: utility {:.3}, deployed [{}]", m.cohort, m.utility, cells.join(" "));
        }
    }
    Ok(())
}
