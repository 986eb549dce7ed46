use std::collections::VecDeque;

use crate::env::Environment;
use crate::error::Result;
use crate::policy::attribution::{Attribution, KernelCredit, MostRecentCredit};
use crate::policy::{argmax_first, Feedback, Policy, RoundContext, Selection};
use crate::types::{Action, Round};

/// Which statistics the index is computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UcbMode {
    /// All observations.
    Plain,
    /// Observations discounted by `γ` per round.
    Discounted(f64),
    /// Observations from the last `τ_w` rounds.
    Window(usize),
}

/// Per-arm pull counts and reward sums for the UCB family.
///
/// Pulls are counted when an arm is selected; credit is added when the
/// attribution rule assigns realized reward to it.
#[derive(Debug, Clone)]
pub struct ArmStatistics {
    mode: UcbMode,
    n_resources: usize,
    count: Vec<f64>,
    sum: Vec<f64>,
    last: Vec<Round>,
    /// Window mode: `(round, pulls, credit)` entries per arm.
    buffer: Vec<VecDeque<(Round, f64, f64)>>,
}

impl ArmStatistics {
    pub fn new(mode: UcbMode, n_individuals: usize, n_resources: usize) -> Self {
        let n = n_individuals * n_resources;
        let buffer = if matches!(mode, UcbMode::Window(_)) { vec![VecDeque::new(); n] } else { Vec::new() };
        Self { mode, n_resources, count: vec![0.0; n], sum: vec![0.0; n], last: vec![0; n], buffer }
    }

    fn decay(&mut self, k: usize, t: Round) {
        if let UcbMode::Discounted(g) = self.mode {
            let f = g.powi((t - self.last[k]) as i32);
            self.count[k] *= f;
            self.sum[k] *= f;
            self.last[k] = t;
        }
    }

    fn expire(&mut self, k: usize, t: Round) {
        if let UcbMode::Window(w) = self.mode {
            while let Some(&(s, p, c)) = self.buffer[k].front() {
                if s + w > t {
                    break;
                }
                self.count[k] -= p;
                self.sum[k] -= c;
                self.buffer[k].pop_front();
            }
            if self.buffer[k].is_empty() {
                self.count[k] = 0.0;
                self.sum[k] = 0.0;
            }
        }
    }

    fn touch(&mut self, k: usize, t: Round) {
        self.decay(k, t);
        self.expire(k, t);
    }

    pub fn pull(&mut self, a: Action, t: Round) {
        let k = a.arm_index(self.n_resources);
        self.touch(k, t);
        self.count[k] += 1.0;
        if matches!(self.mode, UcbMode::Window(_)) {
            self.buffer[k].push_back((t, 1.0, 0.0));
        }
    }

    pub fn credit(&mut self, a: Action, reward: f64, t: Round) {
        let k = a.arm_index(self.n_resources);
        self.touch(k, t);
        self.sum[k] += reward;
        if matches!(self.mode, UcbMode::Window(_)) {
            self.buffer[k].push_back((t, 0.0, reward));
        }
    }

    /// Effective pull count at round `t`.
    pub fn count(&mut self, a: Action, t: Round) -> f64 {
        let k = a.arm_index(self.n_resources);
        self.touch(k, t);
        self.count[k]
    }

    /// `mean + sqrt(2 ln t' / n)`, infinite for unpulled arms, where `t'` is
    /// `t` or `min(t, τ_w)` in window mode.
    pub fn index(&mut self, a: Action, t: Round) -> f64 {
        let k = a.arm_index(self.n_resources);
        self.touch(k, t);
        let n = self.count[k];
        if n <= 0.0 {
            return f64::INFINITY;
        }
        let horizon = match self.mode {
            UcbMode::Window(w) => t.min(w),
            _ => t,
        };
        self.sum[k] / n + (2.0 * (horizon.max(1) as f64).ln() / n).sqrt()
    }
}

/// Credit rule bound to one policy.
#[derive(Debug, Clone)]
pub(crate) enum Creditor {
    MostRecent(MostRecentCredit),
    Kernel(KernelCredit),
}

impl Creditor {
    pub(crate) fn new(rule: Attribution, env: &Environment) -> Self {
        match rule {
            Attribution::MostRecent => Self::MostRecent(MostRecentCredit::default()),
            Attribution::Kernel => Self::Kernel(KernelCredit::new(env.horizon(), 1.0)),
        }
    }

    pub(crate) fn credit(&mut self, fb: &Feedback<'_>) -> Vec<(Action, f64)> {
        match self {
            Self::MostRecent(c) => {
                let actions: Vec<Action> = fb.events.iter().map(|e| e.action()).collect();
                c.credit(&actions, fb.realized)
            }
            Self::Kernel(c) => {
                for e in fb.events {
                    c.register(e.action(), e.round, 1.0, &fb.env.resources()[e.resource].kernel);
                }
                c.credit(fb.round, fb.realized, &fb.env.kernels()).0
            }
        }
    }
}

/// UCB, DUCB and SWUCB over `(individual, resource)` arms, one pull per round.
pub struct UcbPolicy {
    stats: ArmStatistics,
    creditor: Creditor,
    name: &'static str,
}

impl UcbPolicy {
    pub fn new(env: &Environment, mode: UcbMode, attribution: Attribution) -> Self {
        let name = match mode {
            UcbMode::Plain => "ucb",
            UcbMode::Discounted(_) => "ducb",
            UcbMode::Window(_) => "swucb",
        };
        Self {
            stats: ArmStatistics::new(mode, env.individuals().len(), env.n_resources()),
            creditor: Creditor::new(attribution, env),
            name,
        }
    }

    pub fn stats_mut(&mut self) -> &mut ArmStatistics {
        &mut self.stats
    }
}

/// Stable argmax of the UCB index over `eligible`.
pub(crate) fn ucb_select(stats: &mut ArmStatistics, eligible: &[Action], t: Round) -> Option<Action> {
    let scores: Vec<f64> = eligible.iter().map(|&a| stats.index(a, t)).collect();
    argmax_first(scores).map(|k| eligible[k])
}

impl Policy for UcbPolicy {
    fn name(&self) -> &'static str {
        self.name
    }

    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection> {
        let pick = ucb_select(&mut self.stats, ctx.eligible, ctx.round);
        if let Some(a) = pick {
            self.stats.pull(a, ctx.round);
        }
        Ok(Selection::single(pick))
    }

    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()> {
        for (a, c) in self.creditor.credit(fb) {
            self.stats.credit(a, c, fb.round);
        }
        Ok(())
    }
}
