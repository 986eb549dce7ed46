use crate::delay::kernel::DelayKernel;
use crate::error::{domain, Error, Result};
use crate::types::{AllocationEvent, Round};

/// Pending and realized delayed rewards over rounds `1..=T`.
///
/// Posting an allocation spreads `base_reward * K(τ)` onto round
/// `t_alloc + τ`; mass that would land after `T` is dropped and tallied in
/// [`RewardLedger::lost_mass`].
#[derive(Debug, Clone)]
pub struct RewardLedger {
    horizon: usize,
    scheduled: Vec<f64>,
    consumed: Vec<bool>,
    lost: f64,
    posted: f64,
}

impl RewardLedger {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            scheduled: vec![0.0; horizon + 1],
            consumed: vec![false; horizon + 1],
            lost: 0.0,
            posted: 0.0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn post_allocation(
        &mut self,
        t_alloc: Round,
        base_reward: f64,
        kernel: &DelayKernel,
    ) -> Result<()> {
        if t_alloc == 0 || t_alloc > self.horizon {
            return Err(domain(format!(
                "allocation round {t_alloc} outside 1..={}",
                self.horizon
            )));
        }
        if base_reward == 0.0 {
            return Ok(());
        }
        self.posted += base_reward;
        for (tau, w) in kernel.weights().iter().enumerate() {
            let t = t_alloc + tau;
            let amount = base_reward * w;
            if t <= self.horizon {
                self.scheduled[t] += amount;
            } else {
                self.lost += amount;
            }
        }
        Ok(())
    }

    /// Reward observed at round `t`. Each round may be realized once.
    pub fn realize(&mut self, t: Round) -> Result<f64> {
        if t == 0 || t > self.horizon {
            return Err(domain(format!("round {t} outside 1..={}", self.horizon)));
        }
        if self.consumed[t] {
            return Err(Error::State(format!("round {t} already realized")));
        }
        self.consumed[t] = true;
        Ok(self.scheduled[t])
    }

    /// Scheduled mass at `t` without consuming it; zero outside `1..=T`.
    pub fn scheduled(&self, t: Round) -> f64 {
        if t == 0 || t > self.horizon {
            0.0
        } else {
            self.scheduled[t]
        }
    }

    pub fn lost_mass(&self) -> f64 {
        self.lost
    }

    pub fn posted_total(&self) -> f64 {
        self.posted
    }
}

/// Direct double sum `y(t) = Σ_u Σ_(i,r) K^r(t-u) · reward · z_{i,r}(u)`
/// over an allocation history. Kernels are indexed by resource id.
pub fn brute_force_reward(history: &[AllocationEvent], kernels: &[DelayKernel], t: Round) -> f64 {
    let mut y = 0.0;
    for e in history {
        if e.round == 0 || e.round > t || e.base_reward == 0.0 {
            continue;
        }
        y += e.base_reward * kernels[e.resource].weight(t - e.round);
    }
    y
}
