use std::collections::BTreeMap;
use std::fmt;

use crate::env::CohortSchedule;
use crate::types::{AllocationEvent, IndividualId, ResourceId, Round};

/// What the checker needs to know about a run.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub horizon: usize,
    pub budgets: Vec<usize>,
    pub schedule: CohortSchedule,
    pub reset_budget_per_cohort: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    /// Two resources to one individual in one round.
    OnePerRound,
    /// More allocations of a resource than its budget.
    Budget,
    /// Re-allocation inside the drawn cooldown window.
    Cooldown,
    /// Allocation outside the individual's cohort window or the horizon.
    Cohort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub round: Round,
    pub individual: Option<IndividualId>,
    pub resource: Option<ResourceId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at round {}: {}", self.kind, self.round, self.detail)
    }
}

/// Independent post-hoc check of a complete allocation history.
///
/// Returns an empty list iff the trace respects one resource per individual
/// per round, every budget, every drawn cooldown and every cohort window.
pub fn audit_trace(history: &[AllocationEvent], cfg: &AuditConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut events: Vec<&AllocationEvent> = history.iter().collect();
    events.sort_by_key(|e| (e.round, e.individual, e.resource));

    for e in &events {
        if e.round == 0 || e.round > cfg.horizon || !cfg.schedule.is_active(e.individual, e.round) {
            out.push(Violation {
                kind: ViolationKind::Cohort,
                round: e.round,
                individual: Some(e.individual),
                resource: Some(e.resource),
                detail: format!("individual {} is not eligible at round {}", e.individual, e.round),
            });
        }
    }

    for w in events.windows(2) {
        if w[0].round == w[1].round && w[0].individual == w[1].individual {
            out.push(Violation {
                kind: ViolationKind::OnePerRound,
                round: w[1].round,
                individual: Some(w[1].individual),
                resource: Some(w[1].resource),
                detail: format!("individual {} received resources {} and {}", w[1].individual, w[0].resource, w[1].resource),
            });
        }
    }

    // budget: per resource, per period (whole horizon or cohort)
    let mut counts: BTreeMap<(ResourceId, usize), (usize, Round)> = BTreeMap::new();
    for e in &events {
        let period = if cfg.reset_budget_per_cohort { cfg.schedule.cohort_at(e.round) } else { 0 };
        let c = counts.entry((e.resource, period)).or_insert((0, 0));
        c.0 += 1;
        let budget = cfg.budgets.get(e.resource).copied().unwrap_or(0);
        if c.0 == budget + 1 {
            c.1 = e.round;
        }
    }
    for (&(r, period), &(n, first_over)) in &counts {
        let budget = cfg.budgets.get(r).copied().unwrap_or(0);
        if n > budget {
            out.push(Violation {
                kind: ViolationKind::Budget,
                round: first_over,
                individual: None,
                resource: Some(r),
                detail: format!("resource {r} allocated {n} times against budget {budget} (period {period})"),
            });
        }
    }

    let mut last: BTreeMap<(IndividualId, ResourceId), (Round, usize)> = BTreeMap::new();
    for e in &events {
        if let Some(&(prev, c)) = last.get(&(e.individual, e.resource)) {
            if e.round <= prev + c {
                out.push(Violation {
                    kind: ViolationKind::Cooldown,
                    round: e.round,
                    individual: Some(e.individual),
                    resource: Some(e.resource),
                    detail: format!(
                        "pair ({}, {}) reallocated at round {} inside cooldown {c} from round {prev}",
                        e.individual, e.resource, e.round
                    ),
                });
            }
        }
        last.insert((e.individual, e.resource), (e.round, e.cooldown));
    }

    out.sort_by_key(|a| (a.round, a.kind));
    out
}
