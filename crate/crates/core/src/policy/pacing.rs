use crate::env::Environment;
use crate::types::{Action, Round};

/// Linear budget release for set-allocating policies: by round `t` of a
/// period of `P` rounds, at most `floor(b·k/P)` units may have been spent,
/// where `k` counts the period's elapsed rounds. The period is the whole
/// horizon, or one cohort when budgets reset per cohort.
#[derive(Debug, Clone)]
pub struct BudgetPacer {
    budgets: Vec<usize>,
    spent: Vec<usize>,
    per_cohort: bool,
    period_start: Round,
    period_len: usize,
}

impl BudgetPacer {
    pub fn new(env: &Environment) -> Self {
        let per_cohort = env.options().reset_budget_per_cohort;
        let period_len = if per_cohort { env.schedule().block_length() } else { env.horizon() };
        Self { budgets: env.budgets(), spent: vec![0; env.n_resources()], per_cohort, period_start: 1, period_len }
    }

    /// Units of each resource that may be allocated at round `t`.
    pub fn release(&mut self, env: &Environment, t: Round, remaining: &[usize]) -> Vec<usize> {
        if self.per_cohort && t > 1 && env.schedule().is_cohort_start(t) && t != self.period_start {
            self.period_start = t;
            self.spent.iter_mut().for_each(|s| *s = 0);
        }
        let k = t + 1 - self.period_start;
        self.budgets
            .iter()
            .zip(&self.spent)
            .zip(remaining)
            .map(|((&b, &s), &rem)| ((b * k) / self.period_len).saturating_sub(s).min(rem))
            .collect()
    }

    pub fn record(&mut self, actions: &[Action]) {
        for a in actions {
            self.spent[a.resource] += 1;
        }
    }

    /// Release rate of resource `r` in units per round.
    pub fn rate(&self, r: usize) -> f64 {
        self.budgets[r] as f64 / self.period_len as f64
    }
}
