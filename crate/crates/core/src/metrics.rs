//! Regret, fairness ratios and outcome disparity computed from run traces.
//!
//! The regret oracle is per-round greedy with true means on the same
//! eligibility snapshot and remaining budgets the policy saw. It allocates
//! at most as many pairs as the policy did, so both spend budget at the same
//! pace and the gap isolates selection quality.

use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::types::{Action, AllocationEvent, GroupId, Regime, Round};

/// What the oracle may choose from at one round.
#[derive(Debug, Clone, Copy)]
pub struct OracleSnapshot<'a> {
    pub env: &'a Environment,
    pub round: Round,
    pub eligible: &'a [Action],
    pub remaining: &'a [usize],
    /// Number of pairs the policy allocated this round.
    pub capacity: usize,
}

/// Value of a pair to the oracle: true mean times the kernel mass that
/// lands inside the horizon.
pub fn oracle_value(env: &Environment, round: Round, a: Action) -> f64 {
    let mass = env.resources()[a.resource].kernel.in_horizon_mass(round, env.horizon());
    env.individual(a.individual).true_means[a.resource] * mass
}

/// Greedy feasible set by descending value, ties broken by ascending action.
/// Pairs with negative value are never taken.
pub fn oracle_allocation(snap: &OracleSnapshot<'_>) -> Vec<Action> {
    let mut scored: Vec<(f64, Action)> =
        snap.eligible.iter().map(|&a| (oracle_value(snap.env, snap.round, a), a)).collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut remaining = snap.remaining.to_vec();
    let mut taken = vec![false; snap.env.individuals().len()];
    let mut out = Vec::with_capacity(snap.capacity);
    for (v, a) in scored {
        if out.len() == snap.capacity || v < 0.0 {
            break;
        }
        if taken[a.individual] || remaining[a.resource] == 0 {
            continue;
        }
        taken[a.individual] = true;
        remaining[a.resource] -= 1;
        out.push(a);
    }
    out
}

/// Total value of the oracle's allocation at this round.
pub fn oracle_reward(snap: &OracleSnapshot<'_>) -> f64 {
    oracle_allocation(snap).iter().map(|&a| oracle_value(snap.env, snap.round, a)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretPoint {
    pub round: Round,
    /// The policy's reward at this round.
    pub y: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub seed: u64,
    pub points: Vec<RegretPoint>,
}

impl RegretCurve {
    pub fn final_regret(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.cumulative)
    }
}

/// Running sum of `oracle[t] - policy[t]`; index 0 is round 1.
pub fn cumulative_regret(policy: &[f64], oracle: &[f64], seed: u64) -> Result<RegretCurve> {
    if policy.len() != oracle.len() {
        return Err(domain(format!("trace lengths differ: {} vs {}", policy.len(), oracle.len())));
    }
    let mut cumulative = 0.0;
    let points = policy
        .iter()
        .zip(oracle)
        .enumerate()
        .map(|(s, (&y, &o))| {
            cumulative += o - y;
            RegretPoint { round: s + 1, y, cumulative }
        })
        .collect();
    Ok(RegretCurve { seed, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupFairness {
    pub group: GroupId,
    pub count: usize,
    pub size: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairnessReport {
    pub regime: Regime,
    pub groups: Vec<GroupFairness>,
}

impl FairnessReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.ratio).collect()
    }

    pub fn max_deviation(&self) -> f64 {
        self.groups.iter().map(|g| (g.ratio - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Each group's allocation rate over the population rate:
/// `(count_k / n_k) / (Σ counts / N)`.
pub fn fairness_ratios(log: &[AllocationEvent], group_sizes: &[usize], regime: Regime) -> Result<FairnessReport> {
    if let Some(k) = group_sizes.iter().position(|&n| n == 0) {
        return Err(Error::Config(format!("group {k} has no members")));
    }
    if log.is_empty() {
        return Err(domain("fairness ratios need at least one allocation"));
    }
    let mut counts = vec![0usize; group_sizes.len()];
    for ev in log {
        let c = counts
            .get_mut(ev.group)
            .ok_or_else(|| domain(format!("allocation to unknown group {}", ev.group)))?;
        *c += 1;
    }
    let total: usize = counts.iter().sum();
    let population: usize = group_sizes.iter().sum();
    let overall = total as f64 / population as f64;
    let groups = counts
        .iter()
        .zip(group_sizes)
        .enumerate()
        .map(|(group, (&count, &size))| GroupFairness {
            group,
            count,
            size,
            ratio: (count as f64 / size as f64) / overall,
        })
        .collect();
    Ok(FairnessReport { regime, groups })
}

/// `max_k mean_k - min_k mean_k` over per-group outcome lists.
pub fn disparity(outcomes_by_group: &[Vec<f64>]) -> Result<f64> {
    if outcomes_by_group.is_empty() {
        return Err(domain("disparity needs at least one group"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (k, ys) in outcomes_by_group.iter().enumerate() {
        if ys.is_empty() {
            return Err(domain(format!("group {k} has no outcomes")));
        }
        let m = ys.iter().sum::<f64>() / ys.len() as f64;
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Ok(hi - lo)
}

/// Per-member outcomes grouped by subgroup: the total base reward each
/// individual received, zero when never allocated. The group mean is then
/// the group's outcome per capita.
pub fn member_outcomes(env: &Environment, log: &[AllocationEvent]) -> Vec<Vec<f64>> {
    let mut per_individual = vec![0.0; env.individuals().len()];
    for ev in log {
        per_individual[ev.individual] += ev.base_reward;
    }
    let mut out = vec![Vec::new(); env.n_groups()];
    for ind in env.individuals() {
        out[ind.group].push(per_individual[ind.id]);
    }
    out
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
