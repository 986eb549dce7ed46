use crate::env::Environment;
use crate::error::Result;
use crate::model::{count_bonus, ModelKind, ModelOptions, PredictorBank, TrainingRow};
use crate::policy::attribution::KernelCredit;
use crate::policy::{argmax_first, Diagnostics, ExplorationSchedule, Feedback, Policy, PolicyParams, RoundContext, Selection};
use crate::types::{Action, Round};

/// An outcome model that is refined online from kernel-credited labels.
///
/// Holds the offline training rows so each refit sees offline and online
/// data together. Estimates are cached per arm until the next refit.
#[derive(Debug, Clone)]
pub struct OnlineModel {
    bank: PredictorBank,
    offline: Vec<TrainingRow>,
    online: Vec<TrainingRow>,
    opts: ModelOptions,
    dirty: Vec<bool>,
    cache: Vec<Option<(f64, f64)>>,
    n_resources: usize,
    refits: usize,
}

impl OnlineModel {
    pub fn new(bank: PredictorBank, offline: Vec<TrainingRow>, opts: ModelOptions) -> Self {
        let n_resources = bank.n_resources();
        Self { bank, offline, online: Vec::new(), opts, dirty: vec![false; n_resources], cache: Vec::new(), n_resources, refits: 0 }
    }

    pub fn bank(&self) -> &PredictorBank {
        &self.bank
    }

    pub fn kind(&self) -> ModelKind {
        self.bank.model(0).kind()
    }

    pub fn refits(&self) -> usize {
        self.refits
    }

    pub fn n_online(&self) -> usize {
        self.online.len()
    }

    fn cached(&mut self, env: &Environment, a: Action) -> (f64, f64) {
        let k = a.arm_index(self.n_resources);
        if self.cache.len() != env.individuals().len() * self.n_resources {
            self.cache = vec![None; env.individuals().len() * self.n_resources];
        }
        if let Some(v) = self.cache[k] {
            return v;
        }
        let x = &env.individual(a.individual).features;
        let m = self.bank.model(a.resource);
        let width = if m.kind() == ModelKind::Mlp { f64::NAN } else { m.uncertainty(x, 0, 1) };
        let v = (self.bank.predict_unchecked(x, a.resource), width);
        self.cache[k] = Some(v);
        v
    }

    /// Prediction `ŷ_{i,r}`.
    pub fn predict(&mut self, env: &Environment, a: Action) -> f64 {
        self.cached(env, a).0
    }

    /// `(ŷ_{i,r}, u_{i,r})`; the network kind uses the cell count bonus.
    pub fn estimate(&mut self, env: &Environment, a: Action, cell_count: u64, t: Round) -> (f64, f64) {
        let (p, w) = self.cached(env, a);
        if w.is_nan() {
            (p, count_bonus(cell_count, t))
        } else {
            (p, w)
        }
    }

    pub fn add_label(&mut self, features: Vec<f64>, resource: usize, outcome: f64) {
        self.online.push(TrainingRow { features, resource, outcome });
        self.dirty[resource] = true;
    }

    /// Refit resources with new labels when `t` closes a refit window.
    pub fn maybe_refit(&mut self, t: Round, window: usize) -> Result<()> {
        if !t.is_multiple_of(window) || !self.dirty.iter().any(|d| *d) {
            return Ok(());
        }
        let dim = self.bank.dim();
        for r in 0..self.n_resources {
            if !self.dirty[r] {
                continue;
            }
            let own = self.offline.iter().chain(&self.online).filter(|row| row.resource == r).count();
            let pooled = own <= 2 * (dim + 1);
            let (xs, ys): (Vec<Vec<f64>>, Vec<f64>) = self
                .offline
                .iter()
                .chain(&self.online)
                .filter(|row| pooled || row.resource == r)
                .map(|row| (row.features.clone(), row.outcome))
                .unzip();
            let opts = self.opts;
            let clamp = self.bank.model(r).is_probability();
            let ys: Vec<f64> = if clamp { ys.into_iter().map(|y| y.clamp(0.0, 1.0)).collect() } else { ys };
            self.bank.refit_resource(r, &xs, &ys, &opts)?;
            self.dirty[r] = false;
        }
        self.cache.clear();
        self.refits += 1;
        Ok(())
    }
}

/// Kernel-aware credit that turns realized mass into model labels.
#[derive(Debug, Clone)]
pub(crate) struct Learner {
    credit: KernelCredit,
    refit_window: usize,
}

impl Learner {
    pub(crate) fn new(env: &Environment, params: &PolicyParams) -> Self {
        Self { credit: KernelCredit::new(env.horizon(), params.label_mass), refit_window: params.refit_window }
    }

    pub(crate) fn observe(&mut self, fb: &Feedback<'_>, model: &mut OnlineModel) -> Result<()> {
        for e in fb.events {
            let prior = if e.predicted_reward.is_finite() { e.predicted_reward } else { 1.0 };
            self.credit.register(e.action(), e.round, prior, &fb.env.resources()[e.resource].kernel);
        }
        let (_, labels) = self.credit.credit(fb.round, fb.realized, &fb.env.kernels());
        for l in labels {
            model.add_label(fb.env.individual(l.action.individual).features.clone(), l.action.resource, l.label);
        }
        model.maybe_refit(fb.round, self.refit_window)
    }
}

/// Constrained contextual UCB: one pair per round maximizing `ŷ + β_t·u`.
pub struct CcucbPolicy {
    model: OnlineModel,
    beta: ExplorationSchedule,
    learner: Learner,
    cell_counts: Vec<u64>,
    n_resources: usize,
}

impl CcucbPolicy {
    pub fn new(env: &Environment, params: &PolicyParams, model: OnlineModel) -> Self {
        Self {
            model,
            beta: params.beta,
            learner: Learner::new(env, params),
            cell_counts: vec![0; env.n_groups() * env.n_resources()],
            n_resources: env.n_resources(),
        }
    }
}

impl Policy for CcucbPolicy {
    fn name(&self) -> &'static str {
        "ccucb"
    }

    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection> {
        let beta = self.beta.beta(ctx.round);
        let mut preds = Vec::with_capacity(ctx.eligible.len());
        let mut scores = Vec::with_capacity(ctx.eligible.len());
        for &a in ctx.eligible {
            let cell = ctx.env.individual(a.individual).group * self.n_resources + a.resource;
            let (p, u) = self.model.estimate(ctx.env, a, self.cell_counts[cell], ctx.round);
            preds.push(p);
            scores.push(p + beta * u);
        }
        let Some(k) = argmax_first(scores) else {
            return Ok(Selection::default());
        };
        let a = ctx.eligible[k];
        self.cell_counts[ctx.env.individual(a.individual).group * self.n_resources + a.resource] += 1;
        Ok(Selection { actions: vec![a], predictions: Some(vec![preds[k]]) })
    }

    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()> {
        self.learner.observe(fb, &mut self.model)
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics { refits: self.model.refits(), ..Default::default() }
    }
}
