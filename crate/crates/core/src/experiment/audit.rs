use std::collections::BTreeMap;
use std::path::Path;

use crate::env::{audit_trace, AuditConfig, CohortSchedule, Violation};
use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::types::AllocationEvent;

/// Violations per trace, keyed by `(regime, kernel, policy, seed)`.
#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub traces: BTreeMap<(String, String, String, u64), Vec<Violation>>,
}

impl AuditReport {
    pub fn violation_count(&self) -> usize {
        self.traces.values().map(Vec::len).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.violation_count() == 0
    }

    /// "clean", or one line per violation.
    pub fn render(&self) -> String {
        if self.is_clean() {
            return format!("clean ({} traces)\n", self.traces.len());
        }
        let mut out = String::new();
        for ((regime, kernel, policy, seed), vs) in &self.traces {
            for v in vs {
                out += &format!("{regime}/{kernel}/{policy}/seed {seed}: {v}\n");
            }
        }
        out
    }
}

fn parse_err(path: &Path, row: usize, detail: impl std::fmt::Display) -> Error {
    Error::Format { path: path.to_path_buf(), detail: format!("row {row}: {detail}") }
}

fn read_schedules(path: &Path, cfg: &ExperimentConfig) -> Result<BTreeMap<u64, CohortSchedule>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut members: BTreeMap<u64, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    for (j, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| rec.get(c).and_then(|s| s.parse::<u64>().ok()).ok_or_else(|| parse_err(path, j + 1, "bad field"));
        let (seed, individual, cohort) = (get(0)?, get(1)? as usize, get(3)? as usize);
        members.entry(seed).or_default().entry(cohort).or_default().push(individual);
    }
    members
        .into_iter()
        .map(|(seed, cohorts)| {
            let mut lists: Vec<Vec<usize>> = cohorts.into_values().collect();
            lists.iter_mut().for_each(|l| l.sort_unstable());
            Ok((seed, CohortSchedule::from_cohorts(lists, cfg.cohort_length, cfg.horizon)?))
        })
        .collect()
}

/// Check an allocation log against the constraints of its config.
pub fn audit_allocations(
    allocations: &Path,
    cohorts: &Path,
    cfg: &ExperimentConfig,
) -> Result<AuditReport> {
    let schedules = read_schedules(cohorts, cfg)?;
    let mut rdr = csv::Reader::from_path(allocations)?;
    let expected = [
        "regime", "kernel", "policy", "seed", "round", "individual", "resource", "group", "base_reward",
        "expected_reward", "predicted_reward", "cooldown",
    ];
    if rdr.headers()?.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Format { path: allocations.to_path_buf(), detail: "unexpected header".into() });
    }
    let mut traces: BTreeMap<(String, String, String, u64), Vec<AllocationEvent>> = BTreeMap::new();
    for (j, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = j + 1;
        let int = |c: usize| rec[c].parse::<usize>().map_err(|e| parse_err(allocations, row, e));
        let real = |c: usize| rec[c].parse::<f64>().map_err(|e| parse_err(allocations, row, e));
        let seed = rec[3].parse::<u64>().map_err(|e| parse_err(allocations, row, e))?;
        let ev = AllocationEvent {
            round: int(4)?,
            individual: int(5)?,
            resource: int(6)?,
            group: int(7)?,
            base_reward: real(8)?,
            expected_reward: real(9)?,
            predicted_reward: real(10)?,
            cooldown: int(11)?,
        };
        traces.entry((rec[0].to_string(), rec[1].to_string(), rec[2].to_string(), seed)).or_default().push(ev);
    }
    let budgets: Vec<usize> = cfg.resources.iter().map(|r| r.budget).collect();
    let mut report = AuditReport::default();
    for (key, events) in traces {
        let schedule = schedules
            .get(&key.3)
            .ok_or_else(|| Error::Format { path: cohorts.to_path_buf(), detail: format!("no cohorts for seed {}", key.3) })?;
        let audit = AuditConfig {
            horizon: cfg.horizon,
            budgets: budgets.clone(),
            schedule: schedule.clone(),
            reset_budget_per_cohort: cfg.reset_budget_per_cohort,
        };
        report.traces.insert(key, audit_trace(&events, &audit));
    }
    Ok(report)
}

/// Audit a report directory written by a run.
pub fn audit_command(report_dir: &Path) -> Result<AuditReport> {
    let cfg = ExperimentConfig::from_toml(&std::fs::read_to_string(report_dir.join("config.toml"))?)?;
    audit_allocations(&report_dir.join("allocations.csv"), &report_dir.join("cohorts.csv"), &cfg)
}
