use rand::Rng;

use crate::env::Environment;
use crate::error::Result;
use crate::policy::ucb::Creditor;
use crate::policy::{Feedback, Policy, PolicyParams, RoundContext, Selection};
use crate::rng::{substream, SimRng};


/// Exponential weights over a fixed arm set, kept in log space.
#[derive(Debug, Clone)]
pub struct Exp3Weights {
    log_w: Vec<f64>,
    eta: f64,
}

impl Exp3Weights {
    pub fn new(n_arms: usize, eta: f64) -> Self {
        Self { log_w: vec![0.0; n_arms], eta }
    }

    /// `(1-η)·w_a/Σw + η/|E|` over the arm subset `arms`.
    pub fn probabilities(&self, arms: &[usize]) -> Vec<f64> {
        if arms.is_empty() {
            return Vec::new();
        }
        let max = arms.iter().map(|&a| self.log_w[a]).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = arms.iter().map(|&a| (self.log_w[a] - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let u = self.eta / arms.len() as f64;
        w.iter().map(|wi| (1.0 - self.eta) * wi / total + u).collect()
    }

    /// Draw one position of `arms` by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, arms: &[usize], rng: &mut R) -> Option<(usize, f64)> {
        let p = self.probabilities(arms);
        if p.is_empty() {
            return None;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, &pk) in p.iter().enumerate() {
            acc += pk;
            if u < acc {
                return Some((k, pk));
            }
        }
        let k = p.len() - 1;
        Some((k, p[k]))
    }

    /// `w_a ← w_a·exp(η·r̂/|E|)` with `r̂ = reward / prob`.
    pub fn update(&mut self, arm: usize, reward: f64, prob: f64, n_eligible: usize) {
        if prob > 0.0 && n_eligible > 0 {
            self.log_w[arm] += self.eta * (reward / prob) / n_eligible as f64;
        }
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }
}

/// Rescale `y` from `[lo, hi]` into `[0, 1]`, clipping out-of-range values.
pub(crate) fn rescale(y: f64, bounds: [f64; 2]) -> (f64, bool) {
    let v = (y - bounds[0]) / (bounds[1] - bounds[0]);
    if (0.0..=1.0).contains(&v) {
        (v, false)
    } else {
        (v.clamp(0.0, 1.0), true)
    }
}

/// EXP3 over `(individual, resource)` arms, one pull per round.
pub struct Exp3Policy {
    weights: Exp3Weights,
    n_resources: usize,
    bounds: [f64; 2],
    rng: SimRng,
    creditor: Creditor,
    /// Probability and eligible-set size of each arm's latest draw.
    last_draw: Vec<(f64, usize)>,
    clipped: usize,
}

impl Exp3Policy {
    pub fn new(env: &Environment, params: &PolicyParams, seed: u64) -> Self {
        let n = env.individuals().len() * env.n_resources();
        Self {
            weights: Exp3Weights::new(n, params.eta),
            n_resources: env.n_resources(),
            bounds: params.reward_bounds,
            rng: substream(seed, "policy"),
            creditor: Creditor::new(params.baseline_attribution, env),
            last_draw: vec![(0.0, 0); n],
            clipped: 0,
        }
    }
}

impl Policy for Exp3Policy {
    fn name(&self) -> &'static str {
        "exp3"
    }

    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection> {
        let arms: Vec<usize> = ctx.eligible.iter().map(|a| a.arm_index(self.n_resources)).collect();
        let Some((k, p)) = self.weights.sample(&arms, &mut self.rng) else {
            return Ok(Selection::default());
        };
        self.last_draw[arms[k]] = (p, arms.len());
        Ok(Selection::single(Some(ctx.eligible[k])))
    }

    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()> {
        for (a, c) in self.creditor.credit(fb) {
            let (v, clipped) = rescale(c, self.bounds);
            self.clipped += usize::from(clipped);
            let arm = a.arm_index(self.n_resources);
            let (p, n) = self.last_draw[arm];
            self.weights.update(arm, v, p, n);
        }
        Ok(())
    }

    fn diagnostics(&self) -> crate::policy::Diagnostics {
        crate::policy::Diagnostics { clipped_rewards: self.clipped, ..Default::default() }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_weights_uniform_probabilities() {
        let w = Exp3Weights::new(4, 0.3);
        for p in w.probabilities(&[0, 1, 2, 3]) {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_eta_is_proportional() {
        let mut w = Exp3Weights::new(2, 0.0);
        w.log_w[1] = 3f64.ln();
        let p = w.probabilities(&[0, 1]);
        assert!((p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn converges_to_paying_arm() {
        let mut w = Exp3Weights::new(2, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3000 {
            let (k, p) = w.sample(&[0, 1], &mut rng).unwrap();
            w.update(k, if k == 0 { 1.0 } else { 0.0 }, p, 2);
        }
        assert!(w.probabilities(&[0, 1])[0] > 0.9);
    }

    #[test]
    fn rescaling_clips_and_flags() {
        assert_eq!(rescale(0.5, [0.0, 2.0]), (0.25, false));
        assert_eq!(rescale(3.0, [0.0, 2.0]), (1.0, true));
        assert_eq!(rescale(-1.0, [0.0, 2.0]), (0.0, true));
    }
}
