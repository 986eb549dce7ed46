//! Allocation policies behind one interface.
//!
//! Each round the runner hands a policy the eligible pairs and remaining
//! budgets; the policy returns an action set. After the environment realizes
//! `y(t)` the policy observes it. Delay-agnostic baselines credit `y(t)` to
//! their most recent action set; model-based policies spread it over pending
//! allocations in proportion to kernel mass.

mod attribution;
mod ccucb;
mod cucb;
mod exp3;
mod linucb;
mod mexp3;
mod pacing;
mod ucb;

pub use attribution::{Attribution, KernelCredit, LabelledOutcome, MostRecentCredit};
pub use ccucb::{CcucbPolicy, OnlineModel};
pub(crate) use ccucb::Learner;
pub use cucb::CucbPolicy;
pub use exp3::{Exp3Policy, Exp3Weights};
pub use linucb::LinUcbPolicy;
pub use mexp3::Mexp3Policy;
pub use pacing::BudgetPacer;
pub use ucb::{ArmStatistics, UcbMode, UcbPolicy};

use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::metacub::{MetaOptimizerConfig, MetaRecord};
use crate::types::{Action, AllocationEvent, Round};

/// Every recognized policy key.
pub const POLICY_KEYS: [&str; 9] = ["ucb", "linucb", "cucb", "exp3", "mexp3", "ducb", "swucb", "ccucb", "metacub"];

/// What a policy sees before choosing.
#[derive(Debug, Clone, Copy)]
pub struct RoundContext<'a> {
    pub env: &'a Environment,
    pub round: Round,
    /// Feasible pairs, ascending.
    pub eligible: &'a [Action],
    pub remaining: &'a [usize],
}

impl RoundContext<'_> {
    pub fn features(&self, a: Action) -> &[f64] {
        &self.env.individual(a.individual).features
    }
}

/// What a policy learns after the environment steps.
#[derive(Debug, Clone, Copy)]
pub struct Feedback<'a> {
    pub env: &'a Environment,
    pub round: Round,
    /// Realized `y(t)`.
    pub realized: f64,
    /// Allocations made this round.
    pub events: &'a [AllocationEvent],
}

/// A policy's choice for one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub actions: Vec<Action>,
    /// Model predictions aligned with `actions`, when the policy has a model.
    pub predictions: Option<Vec<f64>>,
}

impl Selection {
    pub fn single(a: Option<Action>) -> Self {
        Self { actions: a.into_iter().collect(), predictions: None }
    }
}

/// Counters a policy may report for the run summary.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// Rescaled rewards that fell outside `[0, 1]` and were clipped.
    pub clipped_rewards: usize,
    /// Rounds on which a budget cap bound a meta-level count.
    pub budget_cap_binds: usize,
    /// Online model refits performed.
    pub refits: usize,
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;
    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection>;
    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()>;

    /// Meta-policies chosen per cohort (MetaCUB only).
    fn meta_records(&self) -> Vec<MetaRecord> {
        Vec::new()
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    SqrtLog,
    Constant,
}

/// Exploration weight `β_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationSchedule {
    pub kind: ScheduleKind,
    pub scale: f64,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        Self { kind: ScheduleKind::SqrtLog, scale: 1.0 }
    }
}

impl ExplorationSchedule {
    pub fn sqrt_log(scale: f64) -> Self {
        Self { kind: ScheduleKind::SqrtLog, scale }
    }

    pub fn constant(scale: f64) -> Self {
        Self { kind: ScheduleKind::Constant, scale }
    }

    /// `c·sqrt(ln max(t, 2))` or the constant `c`.
    pub fn beta(&self, t: usize) -> f64 {
        match self.kind {
            ScheduleKind::SqrtLog => self.scale * (t.max(2) as f64).ln().sqrt(),
            ScheduleKind::Constant => self.scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale >= 0.0 && self.scale.is_finite() {
            Ok(())
        } else {
            Err(Error::Config("exploration scale must be finite and non-negative".into()))
        }
    }
}

/// Hyperparameters shared by all policies; each policy reads its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyParams {
    /// DUCB discount.
    pub gamma: f64,
    /// SWUCB window.
    pub window: usize,
    /// EXP3 / mEXP3 exploration rate.
    pub eta: f64,
    /// LinUCB confidence multiplier.
    pub alpha_lin: f64,
    /// CUCB arms per round.
    pub cucb_m: usize,
    /// mEXP3 catalog size.
    pub mexp3_catalog: usize,
    /// Outcome range used to rescale EXP3 rewards to `[0, 1]`.
    pub reward_bounds: [f64; 2],
    /// Exploration schedule for ccucb and the MetaCUB base level.
    pub beta: ExplorationSchedule,
    /// Credit rule for the delay-agnostic baselines.
    pub baseline_attribution: Attribution,
    /// Rounds between online refits of the outcome model.
    pub refit_window: usize,
    /// Realized kernel mass at which a pending allocation becomes a label.
    pub label_mass: f64,
    pub meta: MetaOptimizerConfig,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            window: 50,
            eta: 0.05,
            alpha_lin: 1.0,
            cucb_m: 2,
            mexp3_catalog: 16,
            reward_bounds: [0.0, 1.0],
            beta: ExplorationSchedule::default(),
            baseline_attribution: Attribution::MostRecent,
            refit_window: 25,
            label_mass: 0.5,
            meta: MetaOptimizerConfig::default(),
        }
    }
}

impl PolicyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad("eta must lie in [0, 1]");
        }
        if !(self.alpha_lin >= 0.0 && self.alpha_lin.is_finite()) {
            return bad("alpha_lin must be finite and non-negative");
        }
        if self.cucb_m == 0 {
            return bad("cucb_m must be at least 1");
        }
        if self.mexp3_catalog == 0 {
            return bad("the mEXP3 catalog must be nonempty");
        }
        if !(self.reward_bounds[1] > self.reward_bounds[0]) {
            return bad("reward_bounds must be increasing");
        }
        if self.refit_window == 0 {
            return bad("refit_window must be at least 1");
        }
        if !(self.label_mass > 0.0 && self.label_mass <= 1.0) {
            return bad("label_mass must lie in (0, 1]");
        }
        self.beta.validate()?;
        self.meta.validate()
    }
}

/// Everything needed to construct a policy for one run.
pub struct PolicyInputs<'a> {
    pub env: &'a Environment,
    pub params: &'a PolicyParams,
    /// Offline-fitted outcome model with its training data; required by
    /// `ccucb` and `metacub`.
    pub model: Option<OnlineModel>,
    pub seed: u64,
}

/// Build the policy registered under `key`.
pub fn build_policy(key: &str, inputs: PolicyInputs<'_>) -> Result<Box<dyn Policy>> {
    let PolicyInputs { env, params, model, seed } = inputs;
    let need_model = |m: Option<OnlineModel>| {
        m.ok_or_else(|| Error::Config(format!("policy {key:?} needs an outcome model")))
    };
    Ok(match key {
        "ucb" => Box::new(UcbPolicy::new(env, UcbMode::Plain, params.baseline_attribution)),
        "ducb" => Box::new(UcbPolicy::new(env, UcbMode::Discounted(params.gamma), params.baseline_attribution)),
        "swucb" => Box::new(UcbPolicy::new(env, UcbMode::Window(params.window), params.baseline_attribution)),
        "cucb" => Box::new(CucbPolicy::new(env, params.cucb_m, params.baseline_attribution)),
        "linucb" => Box::new(LinUcbPolicy::new(env, params.alpha_lin, params.baseline_attribution)),
        "exp3" => Box::new(Exp3Policy::new(env, params, seed)),
        "mexp3" => Box::new(Mexp3Policy::new(env, params, seed)?),
        "ccucb" => Box::new(CcucbPolicy::new(env, params, need_model(model)?)),
        "metacub" => Box::new(crate::metacub::MetaCubPolicy::new(env, params, need_model(model)?, seed)),
        other => return Err(Error::Config(format!("unknown policy key {other:?}"))),
    })
}

/// Stable argmax: the first index with the strictly largest score.
pub(crate) fn argmax_first<I: IntoIterator<Item = f64>>(scores: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((k, s)),
        }
    }
    best.map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let s = ExplorationSchedule::sqrt_log(2.0);
        assert_eq!(s.beta(1), s.beta(2));
        assert!((s.beta(100) - 2.0 * 100f64.ln().sqrt()).abs() < 1e-15);
        assert_eq!(ExplorationSchedule::constant(0.3).beta(77), 0.3);
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax_first([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_first(Vec::<f64>::new()), None);
        assert_eq!(argmax_first([f64::INFINITY, f64::INFINITY]), Some(0));
    }

    #[test]
    fn defaults_validate() {
        PolicyParams::default().validate().unwrap();
        let p = PolicyParams { gamma: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
