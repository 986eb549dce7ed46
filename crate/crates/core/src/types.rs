//! Identifiers and records shared by the environment, policies and reports.

use std::fmt;

/// Dense index of an individual in the simulated population.
pub type IndividualId = usize;
/// Dense index of a resource type.
pub type ResourceId = usize;
/// Dense index of a subgroup.
pub type GroupId = usize;
/// One-based decision round.
pub type Round = usize;

/// An `(individual, resource)` pair. Ordering is the stable tie-break order
/// used by every policy: ascending individual, then ascending resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub individual: IndividualId,
    pub resource: ResourceId,
}

impl Action {
    pub fn new(individual: IndividualId, resource: ResourceId) -> Self {
        Self { individual, resource }
    }

    /// Flat arm index for per-arm tables of size `n_individuals * n_resources`.
    pub fn arm_index(&self, n_resources: usize) -> usize {
        self.individual * n_resources + self.resource
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(i={}, r={})", self.individual, self.resource)
    }
}

/// One realized allocation `z_{i,r}(t) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationEvent {
    pub round: Round,
    pub individual: IndividualId,
    pub resource: ResourceId,
    pub group: GroupId,
    /// Noisy ground-truth draw posted to the reward ledger.
    pub base_reward: f64,
    /// Noise-free ground-truth mean of the pair.
    pub expected_reward: f64,
    /// What the acting policy's model predicted (NaN when the policy has no model).
    pub predicted_reward: f64,
    /// Cooldown length drawn for this allocation.
    pub cooldown: usize,
}

impl AllocationEvent {
    pub fn action(&self) -> Action {
        Action::new(self.individual, self.resource)
    }
}

/// Feedback regime: rewards arrive at once or spread by the delay kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Immediate,
    Delayed,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Immediate => "immediate",
            Regime::Delayed => "delayed",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
