use crate::env::Environment;
use crate::error::Result;
use crate::policy::attribution::Attribution;
use crate::policy::ucb::{ArmStatistics, Creditor, UcbMode};
use crate::policy::{Feedback, Policy, RoundContext, Selection};
use crate::types::{Action, Round};

/// Combinatorial UCB: the top `m` arms by UCB index each round.
pub struct CucbPolicy {
    stats: ArmStatistics,
    creditor: Creditor,
    m: usize,
}

impl CucbPolicy {
    pub fn new(env: &Environment, m: usize, attribution: Attribution) -> Self {
        Self {
            stats: ArmStatistics::new(UcbMode::Plain, env.individuals().len(), env.n_resources()),
            creditor: Creditor::new(attribution, env),
            m,
        }
    }
}

/// Top-`m` eligible arms by index, at most one per individual and no more
/// than `remaining[r]` of resource `r`. Ties keep ascending action order.
pub(crate) fn cucb_select(
    stats: &mut ArmStatistics,
    eligible: &[Action],
    remaining: &[usize],
    t: Round,
    m: usize,
) -> Vec<Action> {
    let mut scored: Vec<(f64, Action)> = eligible.iter().map(|&a| (stats.index(a, t), a)).collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut left = remaining.to_vec();
    let mut taken: Vec<Action> = Vec::with_capacity(m);
    for (_, a) in scored {
        if taken.len() == m {
            break;
        }
        if left[a.resource] == 0 || taken.iter().any(|b| b.individual == a.individual) {
            continue;
        }
        left[a.resource] -= 1;
        taken.push(a);
    }
    taken.sort_unstable();
    taken
}

impl Policy for CucbPolicy {
    fn name(&self) -> &'static str {
        "cucb"
    }

    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection> {
        let picks = cucb_select(&mut self.stats, ctx.eligible, ctx.remaining, ctx.round, self.m);
        for &a in &picks {
            self.stats.pull(a, ctx.round);
        }
        Ok(Selection { actions: picks, predictions: None })
    }

    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()> {
        for (a, c) in self.creditor.credit(fb) {
            self.stats.credit(a, c, fb.round);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::ucb::ucb_select;

    fn primed() -> ArmStatistics {
        let mut s = ArmStatistics::new(UcbMode::Plain, 3, 2);
        let rewards = [(0, 0, 0.9), (0, 1, 0.8), (1, 0, 0.3), (1, 1, 0.2), (2, 0, 0.5), (2, 1, 0.1)];
        for (i, r, v) in rewards {
            s.pull(Action::new(i, r), 1);
            s.credit(Action::new(i, r), v, 1);
        }
        s
    }

    fn all() -> Vec<Action> {
        (0..3).flat_map(|i| (0..2).map(move |r| Action::new(i, r))).collect()
    }

    #[test]
    fn m_one_matches_ucb() {
        let mut a = primed();
        let mut b = primed();
        let el = all();
        assert_eq!(cucb_select(&mut a, &el, &[9, 9], 4, 1), vec![ucb_select(&mut b, &el, 4).unwrap()]);
    }

    #[test]
    fn shared_individual_keeps_higher_score() {
        let mut s = primed();
        let picks = cucb_select(&mut s, &all(), &[9, 9], 4, 2);
        assert_eq!(picks, vec![Action::new(0, 0), Action::new(2, 0)]);
    }

    #[test]
    fn large_m_takes_everyone_once() {
        let mut s = primed();
        let picks = cucb_select(&mut s, &all(), &[9, 9], 4, 100);
        assert_eq!(picks.len(), 3);
        let picks = cucb_select(&mut s, &all(), &[1, 0], 4, 100);
        assert_eq!(picks, vec![Action::new(0, 0)]);
    }
}
