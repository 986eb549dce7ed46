use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::runner::{GridOutput, RunResult};
use crate::experiment::ExperimentConfig;
use crate::metrics::mean_std;

/// Files written by [`write_reports`].
pub const REPORT_FILES: [&str; 9] = [
    "regret.csv",
    "fairness.csv",
    "disparity.csv",
    "allocations.csv",
    "kernels.csv",
    "metapolicy.csv",
    "cohorts.csv",
    "summary.csv",
    "config.toml",
];

fn writer(dir: &Path, name: &str, header: &[&str]) -> Result<csv::Writer<std::fs::File>> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    Ok(w)
}

fn num(x: f64) -> String {
    format!("{x}")
}

type CellKey<'a> = (&'a str, &'a str, &'a str);

fn by_cell(runs: &[RunResult]) -> BTreeMap<CellKey<'_>, Vec<&RunResult>> {
    let mut out: BTreeMap<CellKey<'_>, Vec<&RunResult>> = BTreeMap::new();
    for r in runs {
        out.entry((r.key.regime.as_str(), r.key.kernel.as_str(), r.key.policy.as_str())).or_default().push(r);
    }
    out
}

/// Write every report file into `dir`. Rows follow the canonical run order
/// (regime, kernel, policy, seed), so reruns are byte-identical.
pub fn write_reports(dir: &Path, cfg: &ExperimentConfig, grid: &GridOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let runs = &grid.runs;

    let mut w = writer(dir, "regret.csv", &["regime", "kernel", "policy", "seed", "round", "y", "cum_regret"])?;
    for r in runs {
        for p in &r.regret.points {
            let y = r.trace.realized[p.round - 1];
            w.write_record([
                r.key.regime.as_str(),
                &r.key.kernel,
                &r.key.policy,
                &r.key.seed.to_string(),
                &p.round.to_string(),
                &num(y),
                &num(p.cumulative),
            ])?;
        }
    }
    w.flush()?;

    let cells = by_cell(runs);
    let mut w = writer(dir, "fairness.csv", &["regime", "kernel", "policy", "group", "count", "size", "ratio"])?;
    for ((regime, kernel, policy), rs) in &cells {
        let reports: Vec<_> = rs.iter().filter_map(|r| r.fairness.as_ref()).collect();
        let Some(first) = reports.first() else { continue };
        for (k, g) in first.groups.iter().enumerate() {
            let counts: Vec<f64> = reports.iter().map(|f| f.groups[k].count as f64).collect();
            let ratios: Vec<f64> = reports.iter().map(|f| f.groups[k].ratio).collect();
            w.write_record([
                *regime,
                *kernel,
                *policy,
                &g.group.to_string(),
                &num(mean_std(&counts).0),
                &g.size.to_string(),
                &num(mean_std(&ratios).0),
            ])?;
        }
    }
    w.flush()?;

    let mut w = writer(dir, "disparity.csv", &["regime", "kernel", "policy", "seed", "disparity"])?;
    for r in runs {
        w.write_record([r.key.regime.as_str(), &r.key.kernel, &r.key.policy, &r.key.seed.to_string(), &num(r.disparity)])?;
    }
    w.flush()?;

    let mut w = writer(
        dir,
        "allocations.csv",
        &[
            "regime", "kernel", "policy", "seed", "round", "individual", "resource", "group", "base_reward",
            "expected_reward", "predicted_reward", "cooldown",
        ],
    )?;
    for r in runs {
        for e in &r.trace.events {
            w.write_record([
                r.key.regime.as_str(),
                &r.key.kernel,
                &r.key.policy,
                &r.key.seed.to_string(),
                &e.round.to_string(),
                &e.individual.to_string(),
                &e.resource.to_string(),
                &e.group.to_string(),
                &num(e.base_reward),
                &num(e.expected_reward),
                &num(e.predicted_reward),
                &e.cooldown.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = writer(dir, "kernels.csv", &["family", "resource", "tau", "weight"])?;
    let mut families = cfg.kernel_families.clone();
    families.sort();
    for fam in &families {
        for k in cfg.kernels(crate::types::Regime::Delayed, fam)? {
            for (tau, wt) in k.weights().iter().enumerate() {
                w.write_record([fam.as_str(), &k.resource().to_string(), &tau.to_string(), &num(*wt)])?;
            }
        }
    }
    w.flush()?;

    let mut w = writer(
        dir,
        "metapolicy.csv",
        &["regime", "kernel", "policy", "seed", "cohort", "group", "resource", "z_star", "deployed", "utility"],
    )?;
    for r in runs {
        for m in &r.trace.meta {
            for k in 0..m.z_star.n_groups() {
                for res in 0..m.z_star.n_resources() {
                    w.write_record([
                        r.key.regime.as_str(),
                        &r.key.kernel,
                        &r.key.policy,
                        &r.key.seed.to_string(),
                        &m.cohort.to_string(),
                        &k.to_string(),
                        &res.to_string(),
                        &num(m.z_star.get(k, res)),
                        &num(m.deployed.get(k, res)),
                        &num(m.utility),
                    ])?;
                }
            }
        }
    }
    w.flush()?;

    let mut w = writer(dir, "cohorts.csv", &["seed", "individual", "group", "cohort"])?;
    for ctx in &grid.contexts {
        for ind in &ctx.individuals {
            let h = ctx.schedule.cohort_of(ind.id).expect("every individual has a cohort");
            w.write_record([ctx.seed.to_string(), ind.id.to_string(), ind.group.to_string(), h.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = writer(
        dir,
        "summary.csv",
        &[
            "regime", "kernel", "policy", "n_seeds", "final_regret_mean", "final_regret_std", "disparity_mean",
            "disparity_std", "max_ratio_deviation", "allocations_mean", "violations",
        ],
    )?;
    for ((regime, kernel, policy), rs) in &cells {
        let finals: Vec<f64> = rs.iter().map(|r| r.regret.final_regret()).collect();
        let disp: Vec<f64> = rs.iter().map(|r| r.disparity).collect();
        let allocs: Vec<f64> = rs.iter().map(|r| r.trace.events.len() as f64).collect();
        let (fm, fs) = mean_std(&finals);
        let (dm, ds) = mean_std(&disp);
        let dev = mean_fairness(rs).map_or(f64::NAN, |ratios| ratios.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max));
        let violations: usize = rs.iter().map(|r| r.violations.len()).sum();
        w.write_record([
            *regime,
            *kernel,
            *policy,
            &rs.len().to_string(),
            &num(fm),
            &num(fs),
            &num(dm),
            &num(ds),
            &num(dev),
            &num(mean_std(&allocs).0),
            &violations.to_string(),
        ])?;
    }
    w.flush()?;

    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    Ok(REPORT_FILES.iter().map(|f| dir.join(f)).collect())
}

/// Per-group fairness ratios averaged over the runs that allocated anything.
pub fn mean_fairness(runs: &[&RunResult]) -> Option<Vec<f64>> {
    let reports: Vec<_> = runs.iter().filter_map(|r| r.fairness.as_ref()).collect();
    let k = reports.first()?.groups.len();
    Some((0..k).map(|g| mean_std(&reports.iter().map(|f| f.groups[g].ratio).collect::<Vec<_>>()).0).collect())
}
