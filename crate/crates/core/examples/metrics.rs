//! Regret, fairness ratios and disparity computed by hand from a small
//! allocation log, then the same metrics for a real run.

use std::path::Path;

use metacub::experiment::{run_one, ExperimentConfig, SeedContext};
use metacub::metrics::{cumulative_regret, disparity, fairness_ratios, member_outcomes};
use metacub::types::{AllocationEvent, Regime};

fn main() -> metacub::Result<()> {
    let curve = cumulative_regret(&[0.2, 0.5, 0.4], &[0.6, 0.6, 0.9], 0)?;
    for p in &curve.points {
        println!("round {}: y {:.1}, cumulative regret {:.1}", p.round, p.y, p.cumulative);
    }

    let log: Vec<AllocationEvent> = [0, 0, 0, 0, 0, 0, 0, 0, 1, 1]
        .iter()
        .enumerate()
        .map(|(j, &group)| AllocationEvent {
            round: j + 1,
            individual: j,
            resource: 0,
            group,
            base_reward: 1.0,
            expected_reward: 1.0,
            predicted_reward: f64::NAN,
            cooldown: 1,
        })
        .collect();
    let report = fairness_ratios(&log, &[10, 10], Regime::Delayed)?;
    println!("groups of 10 with 8 and 2 allocations: ratios {:?}", report.ratios());
    println!("disparity of per-capita outcomes [[1, 0.5], [0.5, 0]]: {}", disparity(&[vec![1.0, 0.5], vec![0.5, 0.0]])?);

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let cfg = ExperimentConfig::load(&path)?;
    let ctx = SeedContext::build(&cfg, 1)?;
    let env = ctx.environment(&cfg, Regime::Immediate, "immediate")?;
    let run = run_one(&cfg, &ctx, Regime::Immediate, "immediate", "metacub")?;
    let outcomes = member_outcomes(&env, &run.trace.events);
    let means: Vec<String> =
        outcomes.iter().map(|g| format!("{:.3}", g.iter().sum::<f64>() / g.len() as f64)).collect();
    println!("metacub, immediate regime: per-capita outcome by group [{}], disparity {:.3}", means.join(", "), run.disparity);
    Ok(())
}
