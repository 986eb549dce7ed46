use crate::metacub::meta::cell_count;
use crate::metacub::MetaPolicy;
use crate::types::{Action, GroupId, IndividualId, ResourceId};

/// An eligible pair with its optimistic score `G = ŷ + β·u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub individual: IndividualId,
    pub resource: ResourceId,
    pub group: GroupId,
    pub predicted: f64,
    pub uncertainty: f64,
    pub score: f64,
}

impl ScoredCandidate {
    pub fn new(a: Action, group: GroupId, predicted: f64, uncertainty: f64, beta: f64) -> Self {
        Self {
            individual: a.individual,
            resource: a.resource,
            group,
            predicted,
            uncertainty,
            score: predicted + beta * uncertainty,
        }
    }

    pub fn action(&self) -> Action {
        Action::new(self.individual, self.resource)
    }
}

/// Extra per-round caps layered over the `floor(z̄·|I_k|)` counts.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationLimits {
    /// Per cell, group-major.
    pub cell: Vec<usize>,
    /// Per resource.
    pub resource: Vec<usize>,
}

/// Result of one base-level allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseAllocation {
    /// Selected candidates in ascending action order.
    pub selected: Vec<ScoredCandidate>,
    /// Whether a limit cut some cell below its `floor(z̄·|I_k|)` count.
    pub limit_bound: bool,
}

/// `n_{k,r} = floor(z̄^k_r·|I_k|)` for every cell.
pub fn cell_counts(z: &MetaPolicy, group_sizes: &[usize]) -> Vec<usize> {
    (0..z.n_groups())
        .flat_map(|k| (0..z.n_resources()).map(move |r| (k, r)))
        .map(|(k, r)| cell_count(z.get(k, r), group_sizes[k]))
        .collect()
}

/// Within each cell take the top-`n_{k,r}` candidates by score.
///
/// Candidates are visited in one pass by descending score, ties by ascending
/// `(individual, resource)`. A candidate is taken when its cell and resource
/// still have room and its individual is not already selected, so an
/// individual topping two resource lists goes to the higher score and the
/// other cell backfills with its next candidate.
pub fn base_allocate(
    z: &MetaPolicy,
    group_sizes: &[usize],
    candidates: &[ScoredCandidate],
    limits: Option<&AllocationLimits>,
) -> BaseAllocation {
    let nr = z.n_resources();
    let counts = cell_counts(z, group_sizes);
    let mut quota = counts.clone();
    let mut limit_bound = false;
    if let Some(l) = limits {
        for (q, &c) in quota.iter_mut().zip(&l.cell) {
            if c < *q {
                *q = c;
                limit_bound = true;
            }
        }
    }
    let mut res_left: Vec<usize> = limits.map_or_else(|| vec![usize::MAX; nr], |l| l.resource.clone());

    let mut order: Vec<&ScoredCandidate> = candidates.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.individual.cmp(&b.individual))
            .then(a.resource.cmp(&b.resource))
    });
    let mut taken: Vec<IndividualId> = Vec::new();
    let mut selected = Vec::new();
    for c in order {
        let cell = c.group * nr + c.resource;
        if quota[cell] == 0 || res_left[c.resource] == 0 || taken.contains(&c.individual) {
            continue;
        }
        quota[cell] -= 1;
        res_left[c.resource] -= 1;
        taken.push(c.individual);
        selected.push(*c);
    }
    if let Some(l) = limits {
        for (r, &cap) in l.resource.iter().enumerate() {
            let wanted: usize = (0..z.n_groups()).map(|k| counts[k * nr + r]).sum();
            limit_bound |= cap < wanted;
        }
    }
    selected.sort_by_key(|c| c.action());
    BaseAllocation { selected, limit_bound }
}
