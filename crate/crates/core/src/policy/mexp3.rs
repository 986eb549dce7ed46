use std::collections::HashMap;

use rand::Rng;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::metacub::{base_allocate, AllocationLimits, CellEntitlements, MetaPolicy, ScoredCandidate};
use crate::policy::exp3::{rescale, Exp3Weights};
use crate::policy::pacing::BudgetPacer;
use crate::policy::ucb::Creditor;
use crate::policy::{Diagnostics, Feedback, Policy, PolicyParams, RoundContext, Selection};
use crate::rng::{substream, SimRng};
use crate::types::Action;

/// EXP3 over a fixed catalog of meta-policies; each draw is expanded into an
/// allocation set by random selection within cells.
pub struct Mexp3Policy {
    catalog: Vec<MetaPolicy>,
    weights: Exp3Weights,
    rng: SimRng,
    pacer: BudgetPacer,
    entitlements: CellEntitlements,
    creditor: Creditor,
    bounds: [f64; 2],
    group_sizes: Vec<usize>,
    /// Catalog entry and draw probability behind each action's latest allocation.
    origin: HashMap<Action, (usize, f64)>,
    clipped: usize,
}

impl Mexp3Policy {
    pub fn new(env: &Environment, params: &PolicyParams, seed: u64) -> Result<Self> {
        if params.mexp3_catalog == 0 {
            return Err(Error::Config("the mEXP3 catalog is empty".into()));
        }
        let mut rng = substream(seed, "policy");
        let catalog: Vec<MetaPolicy> =
            (0..params.mexp3_catalog).map(|_| MetaPolicy::sample(env.n_groups(), env.n_resources(), &mut rng)).collect();
        Ok(Self::with_catalog(env, params, catalog, rng))
    }

    pub fn with_catalog(env: &Environment, params: &PolicyParams, catalog: Vec<MetaPolicy>, rng: SimRng) -> Self {
        Self {
            weights: Exp3Weights::new(catalog.len(), params.eta),
            catalog,
            rng,
            pacer: BudgetPacer::new(env),
            entitlements: CellEntitlements::new(env.n_groups(), env.n_resources()),
            creditor: Creditor::new(params.baseline_attribution, env),
            bounds: params.reward_bounds,
            group_sizes: env.group_sizes(),
            origin: HashMap::new(),
            clipped: 0,
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let arms: Vec<usize> = (0..self.catalog.len()).collect();
        self.weights.probabilities(&arms)
    }
}

impl Policy for Mexp3Policy {
    fn name(&self) -> &'static str {
        "mexp3"
    }

    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection> {
        let arms: Vec<usize> = (0..self.catalog.len()).collect();
        let (arm, p) = self.weights.sample(&arms, &mut self.rng).expect("catalog is nonempty");
        let z = &self.catalog[arm];
        let sched = ctx.env.schedule();
        if sched.is_cohort_start(ctx.round) {
            self.entitlements.reset();
        }
        let release = self.pacer.release(ctx.env, ctx.round, ctx.remaining);
        let rates: Vec<f64> = (0..ctx.env.n_resources()).map(|r| self.pacer.rate(r)).collect();
        self.entitlements.accrue(z, &rates);
        let limits = AllocationLimits { cell: self.entitlements.caps(), resource: release };
        let candidates: Vec<ScoredCandidate> = ctx
            .eligible
            .iter()
            .map(|&a| {
                let key: f64 = self.rng.random();
                ScoredCandidate::new(a, ctx.env.individual(a.individual).group, key, 0.0, 0.0)
            })
            .collect();
        let out = base_allocate(z, &self.group_sizes, &candidates, Some(&limits));
        let actions: Vec<Action> = out.selected.iter().map(|c| c.action()).collect();
        for c in &out.selected {
            self.entitlements.record(c.group, c.resource);
            self.origin.insert(c.action(), (arm, p));
        }
        self.pacer.record(&actions);
        Ok(Selection { actions, predictions: None })
    }

    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()> {
        let n = self.catalog.len();
        for (a, c) in self.creditor.credit(fb) {
            if let Some(&(arm, p)) = self.origin.get(&a) {
                let (v, clipped) = rescale(c, self.bounds);
                self.clipped += usize::from(clipped);
                self.weights.update(arm, v, p, n);
            }
        }
        Ok(())
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics { clipped_rewards: self.clipped, ..Default::default() }
    }
}
