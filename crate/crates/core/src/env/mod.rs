//! The constrained allocation environment.
//!
//! Individuals arrive in cohorts, each eligible only during its block of
//! rounds. Every round a policy submits a set of `(individual, resource)`
//! pairs; the environment checks one-resource-per-individual, remaining
//! budgets and cooldown clocks, draws a cooldown and a noisy outcome for each
//! allocation, and posts the outcome through the resource's delay kernel.
//!
//! Random draws are keyed by `(seed, round, individual, resource)` so two
//! policies making the same allocation see the same cooldown and noise.

mod audit;
mod schedule;
mod state;

pub use audit::{audit_trace, AuditConfig, Violation, ViolationKind};
pub use schedule::CohortSchedule;
pub use state::{EnvState, StepOutcome};

use serde::{Deserialize, Serialize};

use crate::delay::DelayKernel;
use crate::error::{Error, Result};
use crate::types::{GroupId, IndividualId, ResourceId};

/// One member of the population.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualRecord {
    pub id: IndividualId,
    pub group: GroupId,
    pub features: Vec<f64>,
    /// Hidden expected outcome under each resource.
    pub true_means: Vec<f64>,
}

/// A resource type with its budget, delay profile and cooldown support.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceSpec {
    pub id: ResourceId,
    pub budget: usize,
    pub kernel: DelayKernel,
    pub cooldown_support: Vec<usize>,
}

impl ResourceSpec {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.cooldown_support.is_empty() {
            return Err(Error::Config(format!("resource {} has an empty cooldown support", self.id)));
        }
        if let Some(c) = self.cooldown_support.iter().find(|&&c| c == 0 || c >= horizon.max(2)) {
            return Err(Error::Config(format!(
                "resource {} cooldown {c} must lie in [1, T)",
                self.id
            )));
        }
        if self.kernel.horizon() != horizon {
            return Err(Error::Config(format!(
                "resource {} kernel length {} differs from horizon {horizon}",
                self.id,
                self.kernel.horizon()
            )));
        }
        Ok(())
    }
}

/// Outcome noise and budget options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvOptions {
    /// Standard deviation of Gaussian noise added to each base reward.
    pub noise_sd: f64,
    /// Reset every resource's budget at the start of each cohort.
    pub reset_budget_per_cohort: bool,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self { noise_sd: 0.1, reset_budget_per_cohort: false }
    }
}

/// Everything fixed for one run: population, resources and cohort schedule.
#[derive(Debug, Clone)]
pub struct Environment {
    individuals: Vec<IndividualRecord>,
    resources: Vec<ResourceSpec>,
    schedule: CohortSchedule,
    n_groups: usize,
    options: EnvOptions,
}

impl Environment {
    pub fn new(
        individuals: Vec<IndividualRecord>,
        resources: Vec<ResourceSpec>,
        schedule: CohortSchedule,
        options: EnvOptions,
    ) -> Result<Self> {
        if resources.is_empty() {
            return Err(Error::Config("at least one resource is required".into()));
        }
        let horizon = schedule.horizon();
        for (r, spec) in resources.iter().enumerate() {
            if spec.id != r {
                return Err(Error::Config(format!("resource ids must be dense; found {} at {r}", spec.id)));
            }
            spec.validate(horizon)?;
        }
        for (i, ind) in individuals.iter().enumerate() {
            if ind.id != i {
                return Err(Error::Config(format!("individual ids must be dense; found {} at {i}", ind.id)));
            }
            if ind.true_means.len() != resources.len() {
                return Err(Error::Config(format!(
                    "individual {i} has {} true means for {} resources",
                    ind.true_means.len(),
                    resources.len()
                )));
            }
        }
        if let Some(&i) = schedule.cohorts().iter().flatten().find(|&&i| i >= individuals.len()) {
            return Err(Error::Config(format!("cohort member {i} is not in the population")));
        }
        if !(options.noise_sd >= 0.0 && options.noise_sd.is_finite()) {
            return Err(Error::Config("noise_sd must be finite and non-negative".into()));
        }
        let n_groups = individuals.iter().map(|i| i.group + 1).max().unwrap_or(0);
        Ok(Self { individuals, resources, schedule, n_groups, options })
    }

    pub fn individuals(&self) -> &[IndividualRecord] {
        &self.individuals
    }

    pub fn individual(&self, i: IndividualId) -> &IndividualRecord {
        &self.individuals[i]
    }

    pub fn resources(&self) -> &[ResourceSpec] {
        &self.resources
    }

    pub fn kernels(&self) -> Vec<DelayKernel> {
        self.resources.iter().map(|r| r.kernel.clone()).collect()
    }

    pub fn n_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn schedule(&self) -> &CohortSchedule {
        &self.schedule
    }

    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    pub fn options(&self) -> &EnvOptions {
        &self.options
    }

    pub fn budgets(&self) -> Vec<usize> {
        self.resources.iter().map(|r| r.budget).collect()
    }

    /// Population size of every group.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut n = vec![0; self.n_groups];
        for ind in &self.individuals {
            n[ind.group] += 1;
        }
        n
    }

    /// Members of cohort `h` grouped by subgroup, each list ascending.
    pub fn cohort_groups(&self, h: usize) -> Vec<Vec<IndividualId>> {
        let mut by_group = vec![Vec::new(); self.n_groups];
        for &i in &self.schedule.cohorts()[h] {
            by_group[self.individuals[i].group].push(i);
        }
        by_group
    }

    pub fn audit_config(&self) -> AuditConfig {
        AuditConfig {
            horizon: self.horizon(),
            budgets: self.budgets(),
            schedule: self.schedule.clone(),
            reset_budget_per_cohort: self.options.reset_budget_per_cohort,
        }
    }
}
