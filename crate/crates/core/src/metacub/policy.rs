use crate::env::Environment;
use crate::error::Result;
use crate::metacub::{base_allocate, meta_optimize, AllocationLimits, CohortPredictions, MetaPolicy, ScoredCandidate};
use crate::policy::{BudgetPacer, Diagnostics, ExplorationSchedule, Feedback, OnlineModel, Policy, PolicyParams, RoundContext, Selection};
use crate::metacub::MetaOptimizerConfig;
use crate::policy::Learner;
use crate::types::{Action, GroupId, ResourceId};

/// Per-cell allocation entitlements accrued from the budget release rate.
///
/// Each round cell `(k, r)` earns `rate_r·z̄^k_r / Z_r`; its cap is the
/// whole part of what it has earned but not yet used.
#[derive(Debug, Clone)]
pub struct CellEntitlements {
    n_resources: usize,
    earned: Vec<f64>,
    used: Vec<usize>,
}

impl CellEntitlements {
    pub fn new(n_groups: usize, n_resources: usize) -> Self {
        Self { n_resources, earned: vec![0.0; n_groups * n_resources], used: vec![0; n_groups * n_resources] }
    }

    pub fn reset(&mut self) {
        self.earned.iter_mut().for_each(|e| *e = 0.0);
        self.used.iter_mut().for_each(|u| *u = 0);
    }

    /// Start a new planning period under `z`: each resource's unused
    /// entitlement is pooled and re-split by `z`'s column shares, so budget
    /// released but not spent in one cohort stays available to the next.
    pub fn carry_over(&mut self, z: &MetaPolicy) {
        for r in 0..self.n_resources {
            let n_groups = self.earned.len() / self.n_resources;
            let cells = (0..n_groups).map(|k| k * self.n_resources + r);
            let left: f64 = cells.clone().map(|c| (self.earned[c] - self.used[c] as f64).max(0.0)).sum();
            let col = z.column_sum(r);
            for (k, c) in cells.enumerate() {
                self.earned[c] = if col > 0.0 { left * z.get(k, r) / col } else { 0.0 };
                self.used[c] = 0;
            }
        }
    }

    pub fn accrue(&mut self, z: &MetaPolicy, rates: &[f64]) {
        for (r, &rate) in rates.iter().enumerate() {
            let col = z.column_sum(r);
            if col <= 0.0 {
                continue;
            }
            for k in 0..z.n_groups() {
                self.earned[k * self.n_resources + r] += rate * z.get(k, r) / col;
            }
        }
    }

    pub fn caps(&self) -> Vec<usize> {
        self.earned
            .iter()
            .zip(&self.used)
            .map(|(&e, &u)| (e - u as f64 + 1e-9).floor().max(0.0) as usize)
            .collect()
    }

    pub fn record(&mut self, k: GroupId, r: ResourceId) {
        self.used[k * self.n_resources + r] += 1;
    }
}

/// The meta-policy chosen for one cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaRecord {
    pub cohort: usize,
    /// Output of the meta-level search.
    pub z_star: MetaPolicy,
    /// What the base level allocated against after the coverage blend.
    pub deployed: MetaPolicy,
    pub utility: f64,
}

/// MetaCUB: a meta-level search at each cohort boundary, then per-round
/// top-n selection within (group, resource) cells by `ŷ + β·u`.
pub struct MetaCubPolicy {
    meta: MetaOptimizerConfig,
    beta: ExplorationSchedule,
    model: OnlineModel,
    learner: Learner,
    pacer: BudgetPacer,
    entitlements: CellEntitlements,
    seed: u64,
    cohort: Option<usize>,
    deployed: MetaPolicy,
    records: Vec<MetaRecord>,
    group_sizes: Vec<usize>,
    cell_counts: Vec<u64>,
    limit_binds: usize,
}

impl MetaCubPolicy {
    pub fn new(env: &Environment, params: &PolicyParams, model: OnlineModel, seed: u64) -> Self {
        Self {
            meta: params.meta,
            beta: params.beta,
            model,
            learner: Learner::new(env, params),
            pacer: BudgetPacer::new(env),
            entitlements: CellEntitlements::new(env.n_groups(), env.n_resources()),
            seed,
            cohort: None,
            deployed: MetaPolicy::zeros(env.n_groups(), env.n_resources()),
            records: Vec::new(),
            group_sizes: env.group_sizes(),
            cell_counts: vec![0; env.n_groups() * env.n_resources()],
            limit_binds: 0,
        }
    }

    fn replan(&mut self, env: &Environment, h: usize) -> Result<()> {
        let groups = env.cohort_groups(h);
        let nr = env.n_resources();
        let model = &mut self.model;
        let preds = CohortPredictions::new(&groups, nr, |i, r| model.predict(env, Action::new(i, r)));
        let out = meta_optimize(&self.meta, &preds, self.seed, &[h as u64])?;
        let members: usize = groups.iter().map(Vec::len).sum();
        let shares: Vec<f64> = groups.iter().map(|g| g.len() as f64 / members.max(1) as f64).collect();
        self.deployed = out.best.with_coverage(&shares, self.meta.coverage);
        self.records.push(MetaRecord { cohort: h, z_star: out.best, deployed: self.deployed.clone(), utility: out.best_utility });
        self.entitlements.carry_over(&self.deployed);
        self.cohort = Some(h);
        Ok(())
    }
}

impl Policy for MetaCubPolicy {
    fn name(&self) -> &'static str {
        "metacub"
    }

    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection> {
        let env = ctx.env;
        let h = env.schedule().cohort_at(ctx.round);
        if self.cohort != Some(h) {
            self.replan(env, h)?;
        }
        let release = self.pacer.release(env, ctx.round, ctx.remaining);
        let rates: Vec<f64> = (0..env.n_resources()).map(|r| self.pacer.rate(r)).collect();
        self.entitlements.accrue(&self.deployed, &rates);

        let beta = self.beta.beta(ctx.round);
        let nr = env.n_resources();
        let candidates: Vec<ScoredCandidate> = ctx
            .eligible
            .iter()
            .map(|&a| {
                let g = env.individual(a.individual).group;
                let (p, u) = self.model.estimate(env, a, self.cell_counts[g * nr + a.resource], ctx.round);
                ScoredCandidate::new(a, g, p, u, beta)
            })
            .collect();
        let limits = AllocationLimits { cell: self.entitlements.caps(), resource: release };
        let out = base_allocate(&self.deployed, &self.group_sizes, &candidates, Some(&limits));
        self.limit_binds += usize::from(out.limit_bound);
        let actions: Vec<Action> = out.selected.iter().map(|c| c.action()).collect();
        for c in &out.selected {
            self.entitlements.record(c.group, c.resource);
            self.cell_counts[c.group * nr + c.resource] += 1;
        }
        self.pacer.record(&actions);
        let predictions = out.selected.iter().map(|c| c.predicted).collect();
        Ok(Selection { actions, predictions: Some(predictions) })
    }

    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()> {
        self.learner.observe(fb, &mut self.model)
    }

    fn meta_records(&self) -> Vec<MetaRecord> {
        self.records.clone()
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics { refits: self.model.refits(), budget_cap_binds: self.limit_binds, ..Default::default() }
    }
}
