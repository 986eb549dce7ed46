use rand::Rng;
use rayon::prelude::*;

use crate::data::{generate_synthetic, read_csv, split, Dataset, Standardization};
use crate::delay::RewardLedger;
use crate::env::{audit_trace, CohortSchedule, EnvOptions, EnvState, Environment, IndividualRecord, ResourceSpec, Violation};
use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::metacub::MetaRecord;
use crate::metrics::{
    cumulative_regret, disparity, fairness_ratios, member_outcomes, oracle_allocation, FairnessReport, OracleSnapshot,
    RegretCurve,
};
use crate::model::{ModelOptions, PredictorBank, TrainingRow};
use crate::policy::{build_policy, Diagnostics, Feedback, OnlineModel, Policy, PolicyInputs, RoundContext};
use crate::rng::substream;
use crate::types::{AllocationEvent, Regime};

/// Everything shared by the runs of one seed: the simulated population,
/// its cohort schedule and the offline outcome model.
#[derive(Debug, Clone)]
pub struct SeedContext {
    pub seed: u64,
    pub individuals: Vec<IndividualRecord>,
    pub schedule: CohortSchedule,
    pub offline_rows: Vec<TrainingRow>,
    pub bank: PredictorBank,
    pub model_options: ModelOptions,
}

fn to_rows(d: &Dataset) -> Vec<TrainingRow> {
    d.rows
        .iter()
        .map(|r| TrainingRow { features: r.features.clone(), resource: r.resource, outcome: r.outcome })
        .collect()
}

impl SeedContext {
    /// Draw or load the population for `seed`, split it, standardize with
    /// training statistics and fit the offline model on the training part.
    pub fn build(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let n_resources = cfg.resources.len();
        let model_options = ModelOptions { seed, ..cfg.model_options };
        let (full, truth) = match (&cfg.dataset.synthetic, &cfg.dataset.csv) {
            (Some(spec), _) => {
                let spec = crate::data::SyntheticSpec { seed: substream(seed, "population").random(), ..spec.clone() };
                let s = generate_synthetic(&spec)?;
                (s.dataset, Some(s.truth))
            }
            (None, Some(src)) => (read_csv(&src.path, &src.schema)?.0, None),
            (None, None) => return Err(Error::Config("no dataset source".into())),
        };
        if let Some(r) = full.rows.iter().map(|r| r.resource).find(|&r| r >= n_resources) {
            return Err(Error::Config(format!("dataset uses resource {r}; config has {n_resources}")));
        }
        // Tag rows with their index so truth follows them through the split.
        let mut tagged = full.clone();
        for (j, r) in tagged.rows.iter_mut().enumerate() {
            r.id = j.to_string();
        }
        let (mut train, mut eval, _) = split(&tagged, cfg.dataset.train_fraction, &mut substream(seed, "split"))?;
        let stats = Standardization::fit(&train.rows)?;
        stats.apply(&mut train.rows);
        stats.apply(&mut eval.rows);
        let offline_rows = to_rows(&train);
        let bank = PredictorBank::fit(&offline_rows, n_resources, cfg.model, &model_options)?;

        let truth = match truth {
            Some(t) => t,
            None => {
                // Without ground truth, a model fitted on every row plays the world.
                let mut all = tagged.clone();
                stats.apply(&mut all.rows);
                let sim = PredictorBank::fit(&to_rows(&all), n_resources, cfg.model, &model_options)?;
                all.rows
                    .iter()
                    .map(|r| (0..n_resources).map(|k| sim.predict(&r.features, k)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let individuals: Vec<IndividualRecord> = eval
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| IndividualRecord {
                id: i,
                group: r.group,
                features: r.features.clone(),
                true_means: truth[r.id.parse::<usize>().expect("tagged id")].clone(),
            })
            .collect();
        let ids: Vec<usize> = (0..individuals.len()).collect();
        let schedule = CohortSchedule::build(&ids, cfg.cohort_length, cfg.horizon, &mut substream(seed, "schedule"))?;
        Ok(Self { seed, individuals, schedule, offline_rows, bank, model_options })
    }

    pub fn environment(&self, cfg: &ExperimentConfig, regime: Regime, family: &str) -> Result<Environment> {
        let kernels = cfg.kernels(regime, family)?;
        let resources = cfg
            .resources
            .iter()
            .zip(kernels)
            .enumerate()
            .map(|(id, (r, kernel))| ResourceSpec { id, budget: r.budget, kernel, cooldown_support: r.cooldown_support.clone() })
            .collect();
        let options = EnvOptions { noise_sd: cfg.noise_sd, reset_budget_per_cohort: cfg.reset_budget_per_cohort };
        Environment::new(self.individuals.clone(), resources, self.schedule.clone(), options)
    }

    pub fn online_model(&self) -> OnlineModel {
        OnlineModel::new(self.bank.clone(), self.offline_rows.clone(), self.model_options)
    }
}

/// Identifies one run of the grid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunKey {
    pub regime: Regime,
    pub kernel: String,
    pub policy: String,
    pub seed: u64,
}

/// Per-round traces of one policy on one environment.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub events: Vec<AllocationEvent>,
    /// Realized `y(t)` with outcome noise.
    pub realized: Vec<f64>,
    /// `y(t)` had every base reward equalled its true mean.
    pub expected: Vec<f64>,
    /// The oracle's `y(t)` under the same kernels.
    pub oracle: Vec<f64>,
    pub meta: Vec<MetaRecord>,
    pub diagnostics: Diagnostics,
    /// Final remaining budget of each resource.
    pub remaining: Vec<usize>,
}

/// Play `policy` for the whole horizon while tracking the greedy oracle on
/// the same snapshots.
pub fn run_episode(env: &Environment, policy: &mut dyn Policy, seed: u64) -> Result<EpisodeTrace> {
    let horizon = env.horizon();
    let mut state = EnvState::new(env, seed);
    let mut oracle_ledger = RewardLedger::new(horizon);
    let mut realized = Vec::with_capacity(horizon);
    let mut expected = Vec::with_capacity(horizon);
    let mut oracle = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let eligible = state.eligible_actions(env);
        let remaining = state.remaining_budgets().to_vec();
        let ctx = RoundContext { env, round: t, eligible: &eligible, remaining: &remaining };
        let sel = policy.select(&ctx)?;
        let snap = OracleSnapshot { env, round: t, eligible: &eligible, remaining: &remaining, capacity: sel.actions.len() };
        for a in oracle_allocation(&snap) {
            let mean = env.individual(a.individual).true_means[a.resource];
            oracle_ledger.post_allocation(t, mean, &env.resources()[a.resource].kernel)?;
        }
        oracle.push(oracle_ledger.realize(t)?);
        let out = state.apply_allocations(env, &sel.actions, sel.predictions.as_deref())?;
        policy.observe(&Feedback { env, round: t, realized: out.realized, events: &out.events })?;
        realized.push(out.realized);
        expected.push(out.expected);
    }
    Ok(EpisodeTrace {
        events: state.history().to_vec(),
        realized,
        expected,
        oracle,
        meta: policy.meta_records(),
        diagnostics: policy.diagnostics(),
        remaining: state.remaining_budgets().to_vec(),
    })
}

/// A finished run with its metrics.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub key: RunKey,
    pub trace: EpisodeTrace,
    /// Pseudo-regret: oracle minus the policy's noise-free `y(t)`.
    pub regret: RegretCurve,
    pub fairness: Option<FairnessReport>,
    pub disparity: f64,
    pub group_sizes: Vec<usize>,
    pub violations: Vec<Violation>,
}

pub fn run_one(cfg: &ExperimentConfig, ctx: &SeedContext, regime: Regime, kernel: &str, policy: &str) -> Result<RunResult> {
    let env = ctx.environment(cfg, regime, kernel)?;
    let needs_model = matches!(policy, "ccucb" | "metacub");
    let inputs = PolicyInputs {
        env: &env,
        params: &cfg.policy,
        model: needs_model.then(|| ctx.online_model()),
        seed: ctx.seed,
    };
    let mut p = build_policy(policy, inputs)?;
    let trace = run_episode(&env, p.as_mut(), ctx.seed)?;
    let regret = cumulative_regret(&trace.expected, &trace.oracle, ctx.seed)?;
    let group_sizes = env.group_sizes();
    let fairness = if trace.events.is_empty() { None } else { Some(fairness_ratios(&trace.events, &group_sizes, regime)?) };
    let disparity = disparity(&member_outcomes(&env, &trace.events))?;
    let violations = audit_trace(&trace.events, &env.audit_config());
    let key = RunKey { regime, kernel: kernel.to_string(), policy: policy.to_string(), seed: ctx.seed };
    Ok(RunResult { key, trace, regret, fairness, disparity, group_sizes, violations })
}

/// Seed contexts and every run of the grid, in canonical key order.
#[derive(Debug, Clone)]
pub struct GridOutput {
    pub contexts: Vec<SeedContext>,
    pub runs: Vec<RunResult>,
}

/// Run the whole grid in a pool of `cfg.effective_workers()` threads.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.effective_workers())
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let contexts: Vec<SeedContext> =
            cfg.seeds.par_iter().map(|&s| SeedContext::build(cfg, s)).collect::<Result<_>>()?;
        let mut jobs = Vec::new();
        for (regime, kernel) in cfg.cells() {
            for policy in &cfg.policies {
                for ctx in &contexts {
                    jobs.push((regime, kernel.clone(), policy.as_str(), ctx));
                }
            }
        }
        let mut runs: Vec<RunResult> = jobs
            .par_iter()
            .map(|(regime, kernel, policy, ctx)| run_one(cfg, ctx, *regime, kernel, policy))
            .collect::<Result<_>>()?;
        runs.sort_by(|a, b| a.key.cmp(&b.key));
        Ok(GridOutput { contexts, runs })
    })
}
