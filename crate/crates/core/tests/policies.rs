mod common;

use common::{person, single_cohort_env};
use metacub::env::{audit_trace, EnvState};
use metacub::experiment::run_episode;
use metacub::model::{ModelKind, ModelOptions, OutcomeModel, PredictorBank, RidgeModel, TrainingRow};
use metacub::policy::{
    build_policy, ArmStatistics, CcucbPolicy, ExplorationSchedule, OnlineModel, Policy, PolicyInputs, PolicyParams,
    RoundContext, UcbMode,
};
use metacub::types::Action;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ridge(weights: Vec<f64>) -> OutcomeModel {
    OutcomeModel::Ridge(RidgeModel::from_parts(weights, 0.0))
}

/// Three individuals, two resources, T = 5, budgets 2 and cooldown 2.
/// Identity Gram matrices make the width `||x||`, so with β = 0.1 the
/// scores are
///
/// | pair  | ŷ   | u     | score  |
/// |-------|-----|-------|--------|
/// | (0,0) | 0.5 | 1     | 0.6    |
/// | (0,1) | 0.2 | 1     | 0.3    |
/// | (1,0) | 0.1 | 1     | 0.2    |
/// | (1,1) | 0.6 | 1     | 0.7    |
/// | (2,0) | 0.6 | 1.414 | 0.7414 |
/// | (2,1) | 0.8 | 1.414 | 0.9414 |
///
/// t=1 takes (2,1). t=2 takes (2,0) since (2,1) cools. t=3 has both pairs of
/// individual 2 cooling and takes (1,1), exhausting resource 1. t=4 leaves
/// (0,0) and (1,0) and takes (0,0), exhausting resource 0. t=5 is empty.
#[test]
fn ccucb_matches_hand_trace() {
    let env = single_cohort_env(
        vec![
            person(0, 0, vec![1.0, 0.0], vec![0.5, 0.2]),
            person(1, 1, vec![0.0, 1.0], vec![0.1, 0.6]),
            person(2, 0, vec![1.0, 1.0], vec![0.6, 0.8]),
        ],
        &[2, 2],
        2,
        5,
        0.0,
    );
    let bank = PredictorBank::new(vec![ridge(vec![0.5, 0.1]), ridge(vec![0.2, 0.6])]).unwrap();
    let params = PolicyParams { beta: ExplorationSchedule::constant(0.1), refit_window: 100, ..Default::default() };
    let model = OnlineModel::new(bank, Vec::new(), ModelOptions::default());
    let mut policy = CcucbPolicy::new(&env, &params, model);
    let trace = run_episode(&env, &mut policy, 0).unwrap();
    let got: Vec<(usize, usize, usize)> = trace.events.iter().map(|e| (e.round, e.individual, e.resource)).collect();
    assert_eq!(got, vec![(1, 2, 1), (2, 2, 0), (3, 1, 1), (4, 0, 0)]);
    let preds: Vec<f64> = trace.events.iter().map(|e| e.predicted_reward).collect();
    for (p, want) in preds.iter().zip([0.8, 0.6, 0.6, 0.5]) {
        assert!((p - want).abs() < 1e-12);
    }
    assert_eq!(trace.remaining, vec![0, 0]);
    assert_eq!(trace.realized, vec![0.8, 0.6, 0.6, 0.5, 0.0]);
}

/// Four individuals on a line; resource 0 pays more on the right and
/// resource 1 on the left. The offline model is fitted on rows with the
/// signs reversed, so the policy must learn from its own labels.
#[test]
fn ccucb_learns_linear_truth() {
    let xs = [-1.0, -0.3, 0.4, 1.0];
    let people = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| person(i, 0, vec![x], vec![0.5 + 0.3 * x, 0.5 - 0.3 * x]))
        .collect();
    let horizon = 400;
    let env = single_cohort_env(people, &[horizon, horizon], 1, horizon, 0.1);
    let offline: Vec<TrainingRow> = (0..3)
        .flat_map(|j| {
            let x = j as f64 - 1.0;
            [
                TrainingRow { features: vec![x], resource: 0, outcome: 0.5 - 0.3 * x },
                TrainingRow { features: vec![x], resource: 1, outcome: 0.5 + 0.3 * x },
            ]
        })
        .collect();
    let opts = ModelOptions::default();
    let bank = PredictorBank::fit(&offline, 2, ModelKind::Ridge, &opts).unwrap();
    let params = PolicyParams { refit_window: 10, ..Default::default() };
    let mut policy = CcucbPolicy::new(&env, &params, OnlineModel::new(bank, offline, opts));

    let mut state = EnvState::new(&env, 3);
    let mut best = 0;
    let mut scored = 0;
    for t in 1..=horizon {
        let eligible = state.eligible_actions(&env);
        let remaining = state.remaining_budgets().to_vec();
        let ctx = RoundContext { env: &env, round: t, eligible: &eligible, remaining: &remaining };
        let sel = policy.select(&ctx).unwrap();
        let mean = |a: &Action| env.individual(a.individual).true_means[a.resource];
        if t > horizon / 2 {
            let top = eligible.iter().map(mean).fold(f64::NEG_INFINITY, f64::max);
            scored += 1;
            best += usize::from(sel.actions.iter().all(|a| mean(a) >= top - 1e-12));
        }
        let out = state.apply_allocations(&env, &sel.actions, sel.predictions.as_deref()).unwrap();
        policy
            .observe(&metacub::policy::Feedback { env: &env, round: t, realized: out.realized, events: &out.events })
            .unwrap();
    }
    let share = best as f64 / scored as f64;
    assert!(share >= 0.9, "best pair chosen on {share:.3} of late rounds");
}

/// Two arms; halfway through the better arm degrades from 0.8 to 0.4 while
/// the other improves from 0.5 to 0.6. Returns regret after the shift.
fn post_shift_regret(mode: UcbMode, seed: u64) -> f64 {
    let horizon = 2000;
    let arms = [Action::new(0, 0), Action::new(0, 1)];
    let mut stats = ArmStatistics::new(mode, 1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut regret = 0.0;
    for t in 1..=horizon {
        let means = if t <= horizon / 2 { [0.8, 0.5] } else { [0.4, 0.6] };
        let scores: Vec<f64> = arms.iter().map(|&a| stats.index(a, t)).collect();
        let k = usize::from(scores[1] > scores[0]);
        stats.pull(arms[k], t);
        let reward = f64::from(u8::from(rng.random::<f64>() < means[k]));
        stats.credit(arms[k], reward, t);
        if t > horizon / 2 {
            regret += 0.6 - means[k];
        }
    }
    regret
}

#[test]
fn forgetting_variants_recover_from_a_mean_shift() {
    for seed in 0..5 {
        let ucb = post_shift_regret(UcbMode::Plain, seed);
        let ducb = post_shift_regret(UcbMode::Discounted(0.995), seed);
        let swucb = post_shift_regret(UcbMode::Window(200), seed);
        assert!(ducb < ucb, "seed {seed}: DUCB {ducb} vs UCB {ucb}");
        assert!(swucb < ucb, "seed {seed}: SWUCB {swucb} vs UCB {ucb}");
    }
}

/// With γ near zero only the latest observation of an arm counts, so its
/// index in the round it was pulled is that reward plus a one-pull bonus.
#[test]
fn tiny_discount_tracks_latest_reward() {
    let a = Action::new(0, 0);
    let b = Action::new(0, 1);
    let mut stats = ArmStatistics::new(UcbMode::Discounted(1e-9), 1, 2);
    for (t, (arm, r)) in [(a, 0.9), (b, 0.1), (a, 0.2), (b, 0.7)].into_iter().enumerate() {
        let t = t + 1;
        stats.pull(arm, t);
        stats.credit(arm, r, t);
        let bonus = (2.0 * (t as f64).ln()).sqrt();
        assert!((stats.index(arm, t) - (r + bonus)).abs() < 1e-6, "round {t}");
    }
}

fn synthetic_env(seed: u64) -> metacub::env::Environment {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::small_config(dir.path(), &["ucb"], &[seed], 40);
    let ctx = metacub::experiment::SeedContext::build(&cfg, seed).unwrap();
    ctx.environment(&cfg, metacub::types::Regime::Delayed, "peaked").unwrap()
}

#[test]
fn forgetting_limits_reproduce_ucb() {
    let env = synthetic_env(7);
    for seed in 0..10 {
        let run = |key: &str, params: &PolicyParams| {
            let mut p = build_policy(key, PolicyInputs { env: &env, params, model: None, seed }).unwrap();
            let events = run_episode(&env, p.as_mut(), seed).unwrap().events;
            events.iter().map(|e| (e.round, e.action())).collect::<Vec<_>>()
        };
        let base = PolicyParams::default();
        let ucb = run("ucb", &base);
        let ducb = run("ducb", &PolicyParams { gamma: 1.0, ..base.clone() });
        let swucb = run("swucb", &PolicyParams { window: env.horizon(), ..base.clone() });
        assert_eq!(ucb, ducb);
        assert_eq!(ucb, swucb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random policies driven through the environment never produce a
    /// trace the auditor rejects.
    #[test]
    fn random_policies_leave_clean_traces(seed in 0u64..1000, keep in 0.05f64..1.0) {
        let env = synthetic_env(seed % 4);
        let mut state = EnvState::new(&env, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while !state.is_finished(&env) {
            let mut eligible = state.eligible_actions(&env);
            eligible.shuffle(&mut rng);
            let mut left = state.remaining_budgets().to_vec();
            let mut used = std::collections::HashSet::new();
            let mut actions = Vec::new();
            for a in eligible {
                if rng.random::<f64>() < keep && left[a.resource] > 0 && used.insert(a.individual) {
                    left[a.resource] -= 1;
                    actions.push(a);
                }
            }
            state.apply_allocations(&env, &actions, None).unwrap();
        }
        prop_assert!(audit_trace(state.history(), &env.audit_config()).is_empty());
    }

    /// Meta-policy expansions stay inside the eligible set.
    #[test]
    fn mexp3_expansions_are_feasible(seed in 0u64..1000) {
        let env = synthetic_env(seed % 4);
        let params = PolicyParams::default();
        let mut p = build_policy("mexp3", PolicyInputs { env: &env, params: &params, model: None, seed }).unwrap();
        let trace = run_episode(&env, p.as_mut(), seed).unwrap();
        prop_assert!(!trace.events.is_empty());
        prop_assert!(audit_trace(&trace.events, &env.audit_config()).is_empty());
    }
}
