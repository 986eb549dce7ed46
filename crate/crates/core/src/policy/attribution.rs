use serde::{Deserialize, Serialize};

use crate::delay::DelayKernel;
use crate::types::{Action, Round};

/// How a blended `y(t)` is credited back to past actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attribution {
    /// All of `y(t)` goes to the most recent nonempty action set, split equally.
    MostRecent,
    /// `y(t)` is split over pending allocations in proportion to
    /// `K^r(t-u)` times a prior weight.
    Kernel,
}

/// Most-recent-action credit.
#[derive(Debug, Clone, Default)]
pub struct MostRecentCredit {
    last: Vec<Action>,
}

impl MostRecentCredit {
    /// Record this round's actions (if any) and split `y` over the latest set.
    pub fn credit(&mut self, actions: &[Action], y: f64) -> Vec<(Action, f64)> {
        if !actions.is_empty() {
            self.last = actions.to_vec();
        }
        if self.last.is_empty() {
            return Vec::new();
        }
        let share = y / self.last.len() as f64;
        self.last.iter().map(|&a| (a, share)).collect()
    }
}

#[derive(Debug, Clone)]
struct Pending {
    action: Action,
    round: Round,
    prior: f64,
    /// In-horizon kernel mass of this allocation.
    total_mass: f64,
    mass: f64,
    credit: f64,
    labelled: bool,
}

/// A pending allocation whose realized mass crossed the label threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledOutcome {
    pub action: Action,
    pub round: Round,
    /// Credited reward divided by realized mass: an estimate of the base reward.
    pub label: f64,
}

/// Kernel-aware credit over pending allocations.
#[derive(Debug, Clone)]
pub struct KernelCredit {
    horizon: usize,
    label_mass: f64,
    pending: Vec<Pending>,
}

impl KernelCredit {
    pub fn new(horizon: usize, label_mass: f64) -> Self {
        Self { horizon, label_mass, pending: Vec::new() }
    }

    /// Register an allocation made at `round` with prior weight `prior`
    /// (floored at 1e-6 so every allocation can receive credit).
    pub fn register(&mut self, action: Action, round: Round, prior: f64, kernel: &DelayKernel) {
        let total_mass = kernel.in_horizon_mass(round, self.horizon);
        self.pending.push(Pending {
            action,
            round,
            prior: if prior.is_finite() { prior.max(1e-6) } else { 1e-6 },
            total_mass,
            mass: 0.0,
            credit: 0.0,
            labelled: false,
        });
    }

    /// Split `y` realized at round `t`. Returns per-allocation credit and the
    /// allocations that became labels this round.
    pub fn credit(&mut self, t: Round, y: f64, kernels: &[DelayKernel]) -> (Vec<(Action, f64)>, Vec<LabelledOutcome>) {
        let weights: Vec<f64> = self
            .pending
            .iter()
            .map(|p| if t >= p.round { kernels[p.action.resource].weight(t - p.round) } else { 0.0 })
            .collect();
        let denom: f64 = self.pending.iter().zip(&weights).map(|(p, w)| w * p.prior).sum();
        let mut credits = Vec::new();
        let mut labels = Vec::new();
        for (p, &w) in self.pending.iter_mut().zip(&weights) {
            if w <= 0.0 {
                continue;
            }
            let c = if denom > 0.0 { y * w * p.prior / denom } else { 0.0 };
            p.mass += w;
            p.credit += c;
            credits.push((p.action, c));
            if !p.labelled && p.mass >= self.label_mass.min(p.total_mass) - 1e-12 {
                p.labelled = true;
                labels.push(LabelledOutcome { action: p.action, round: p.round, label: p.credit / p.mass });
            }
        }
        self.pending.retain(|p| !(p.labelled && p.mass >= p.total_mass - 1e-12));
        (credits, labels)
    }

    pub fn n_pending(&self) -> usize {
        self.pending.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_recent_splits_over_latest_set() {
        let mut c = MostRecentCredit::default();
        assert!(c.credit(&[], 1.0).is_empty());
        let a = [Action::new(0, 0), Action::new(1, 1)];
        assert_eq!(c.credit(&a, 1.0), vec![(a[0], 0.5), (a[1], 0.5)]);
        assert_eq!(c.credit(&[], 0.4), vec![(a[0], 0.2), (a[1], 0.2)]);
    }

    #[test]
    fn kernel_weights_sum_to_in_horizon_mass() {
        let k = DelayKernel::from_weights(0, vec![0.25, 0.5, 0.25]).unwrap();
        let kernels = [k.clone()];
        let mut c = KernelCredit::new(3, 0.5);
        c.register(Action::new(0, 0), 2, 1.0, &k);
        let _ = c.credit(1, 1.0, &kernels);
        assert_eq!(c.pending[0].mass, 0.0);
        let _ = c.credit(2, 1.0, &kernels);
        assert_eq!(c.pending[0].mass, 0.25);
        assert!((c.pending[0].total_mass - 0.75).abs() < 1e-15);
        let (credits, labels) = c.credit(3, 1.0, &kernels);
        assert_eq!(credits.len(), 1);
        assert_eq!(labels.len(), 1);
        assert!((labels[0].label - 2.0 / 0.75).abs() < 1e-12);
        assert_eq!(c.n_pending(), 0, "fully realized entries are dropped");
    }

    #[test]
    fn immediate_kernel_gives_exact_labels() {
        let k = DelayKernel::immediate(5, 0).unwrap();
        let kernels = [k.clone()];
        let mut c = KernelCredit::new(5, 0.5);
        c.register(Action::new(3, 0), 1, 0.2, &k);
        c.register(Action::new(4, 0), 1, 0.6, &k);
        let (credits, labels) = c.credit(1, 1.6, &kernels);
        assert_eq!(credits.len(), 2);
        assert!((credits[0].1 - 0.4).abs() < 1e-15 && (credits[1].1 - 1.2).abs() < 1e-15);
        assert_eq!(labels.len(), 2);
        assert_eq!(c.n_pending(), 0);
    }

    #[test]
    fn labels_wait_for_half_the_mass() {
        let k = DelayKernel::from_weights(0, vec![0.2, 0.2, 0.6]).unwrap();
        let kernels = [k.clone()];
        let mut c = KernelCredit::new(10, 0.5);
        c.register(Action::new(0, 0), 1, 1.0, &k);
        assert!(c.credit(1, 0.2, &kernels).1.is_empty());
        assert!(c.credit(2, 0.2, &kernels).1.is_empty());
        let (_, labels) = c.credit(3, 0.6, &kernels);
        assert_eq!(labels.len(), 1);
        assert!((labels[0].label - 1.0).abs() < 1e-12);
    }
}
