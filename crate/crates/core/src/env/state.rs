use rand::Rng;
use rand_distr::StandardNormal;

use crate::delay::RewardLedger;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::rng::indexed_stream;
use crate::types::{Action, AllocationEvent, Round};

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct EnvState {
    seed: u64,
    round: Round,
    remaining: Vec<usize>,
    /// Last round on which each `(i, r)` arm is still blocked.
    blocked_until: Vec<Round>,
    ledger: RewardLedger,
    expected_ledger: RewardLedger,
    history: Vec<AllocationEvent>,
    n_resources: usize,
}

/// Result of one [`EnvState::apply_allocations`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub round: Round,
    /// Realized noisy reward `y(t)`.
    pub realized: f64,
    /// Realized reward had every base reward equalled its true mean.
    pub expected: f64,
    /// Events appended this round, in ascending action order.
    pub events: Vec<AllocationEvent>,
}

impl EnvState {
    pub fn new(env: &Environment, seed: u64) -> Self {
        let n_resources = env.n_resources();
        Self {
            seed,
            round: 1,
            remaining: env.budgets(),
            blocked_until: vec![0; env.individuals().len() * n_resources],
            ledger: RewardLedger::new(env.horizon()),
            expected_ledger: RewardLedger::new(env.horizon()),
            history: Vec::new(),
            n_resources,
        }
    }

    /// The next round to be played (one-based).
    pub fn round(&self) -> Round {
        self.round
    }

    pub fn is_finished(&self, env: &Environment) -> bool {
        self.round > env.horizon()
    }

    pub fn remaining_budgets(&self) -> &[usize] {
        &self.remaining
    }

    pub fn history(&self) -> &[AllocationEvent] {
        &self.history
    }

    pub fn ledger(&self) -> &RewardLedger {
        &self.ledger
    }

    pub fn expected_ledger(&self) -> &RewardLedger {
        &self.expected_ledger
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether `(i, r)` is still cooling down at the current round.
    pub fn is_cooling(&self, a: Action) -> bool {
        self.blocked_until[a.arm_index(self.n_resources)] >= self.round
    }

    /// Pairs that may be allocated this round, in ascending action order.
    pub fn eligible_actions(&self, env: &Environment) -> Vec<Action> {
        if self.is_finished(env) {
            return Vec::new();
        }
        let mut out = Vec::new();
        for &i in env.schedule().active(self.round) {
            for r in 0..self.n_resources {
                let a = Action::new(i, r);
                if self.remaining[r] > 0 && !self.is_cooling(a) {
                    out.push(a);
                }
            }
        }
        out
    }

    fn check(&self, env: &Environment, actions: &[Action]) -> Result<()> {
        let t = self.round;
        let violation = |detail: String| Error::ConstraintViolation { round: t, detail };
        if self.is_finished(env) {
            return Err(Error::State(format!("round {t} is past the horizon")));
        }
        let mut used = vec![0usize; self.n_resources];
        let mut sorted: Vec<Action> = actions.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0].individual == w[1].individual {
                return Err(violation(format!("individual {} allocated twice", w[0].individual)));
            }
        }
        for &a in &sorted {
            if a.resource >= self.n_resources || a.individual >= env.individuals().len() {
                return Err(violation(format!("unknown action {a}")));
            }
            if !env.schedule().is_active(a.individual, t) {
                return Err(violation(format!("{a} is outside its cohort window")));
            }
            if self.is_cooling(a) {
                return Err(violation(format!("{a} is cooling down")));
            }
            used[a.resource] += 1;
            if used[a.resource] > self.remaining[a.resource] {
                return Err(violation(format!("budget of resource {} exceeded", a.resource)));
            }
        }
        Ok(())
    }

    /// Allocate `actions` at the current round, realize `y(t)` and advance.
    ///
    /// `predictions`, when given, must align with `actions` and is recorded
    /// in the events. Any infeasible action aborts without changing state.
    pub fn apply_allocations(
        &mut self,
        env: &Environment,
        actions: &[Action],
        predictions: Option<&[f64]>,
    ) -> Result<StepOutcome> {
        self.check(env, actions)?;
        if let Some(p) = predictions {
            if p.len() != actions.len() {
                return Err(Error::Parameter("predictions must align with actions".into()));
            }
        }
        let t = self.round;
        let mut order: Vec<usize> = (0..actions.len()).collect();
        order.sort_by_key(|&k| actions[k]);
        let mut events = Vec::with_capacity(actions.len());
        for k in order {
            let a = actions[k];
            let spec = &env.resources()[a.resource];
            let ind = env.individual(a.individual);
            let mut draw = indexed_stream(self.seed, "cooldowns", &[t as u64, a.individual as u64, a.resource as u64]);
            let cooldown = spec.cooldown_support[draw.random_range(0..spec.cooldown_support.len())];
            let mut noise = indexed_stream(self.seed, "environment", &[t as u64, a.individual as u64, a.resource as u64]);
            let eps: f64 = noise.sample(StandardNormal);
            let mean = ind.true_means[a.resource];
            let base = mean + env.options().noise_sd * eps;

            self.remaining[a.resource] -= 1;
            self.blocked_until[a.arm_index(self.n_resources)] = t + cooldown;
            self.ledger.post_allocation(t, base, &spec.kernel)?;
            self.expected_ledger.post_allocation(t, mean, &spec.kernel)?;
            let ev = AllocationEvent {
                round: t,
                individual: a.individual,
                resource: a.resource,
                group: ind.group,
                base_reward: base,
                expected_reward: mean,
                predicted_reward: predictions.map_or(f64::NAN, |p| p[k]),
                cooldown,
            };
            self.history.push(ev.clone());
            events.push(ev);
        }
        let realized = self.ledger.realize(t)?;
        let expected = self.expected_ledger.realize(t)?;
        self.round += 1;
        if env.options().reset_budget_per_cohort
            && self.round <= env.horizon()
            && env.schedule().is_cohort_start(self.round)
        {
            self.remaining = env.budgets();
        }
        Ok(StepOutcome { round: t, realized, expected, events })
    }
}
