//! Acceptance criteria on the desk-scale preset. Prints one PASS/FAIL line
//! per criterion, then fails if any criterion failed.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use metacub::delay::{brute_force_reward, BetaParams, DelayKernel, RewardLedger};
use metacub::experiment::{mean_fairness, run_episode, run_experiment, run_grid, ExperimentConfig, RunResult, SeedContext, REPORT_FILES};
use metacub::metacub::{meta_optimize, CohortPredictions, MetaOptimizerConfig};
use metacub::metrics::mean_std;
use metacub::model::{logistic_gradient, logistic_loss, MlpHead, MlpModel};
use metacub::policy::{build_policy, PolicyInputs, PolicyParams, POLICY_KEYS};
use metacub::types::{AllocationEvent, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdicts(Vec<(String, bool)>);

impl Verdicts {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.0.push((name.to_string(), ok));
    }
}

fn desk() -> ExperimentConfig {
    ExperimentConfig::load(&common::desk_config_path()).unwrap()
}

fn kernel_correctness() -> (bool, String) {
    let start = Instant::now();
    let shapes = [0.5, 1.0, 2.0, 5.0];
    let mut worst: f64 = 0.0;
    let mut negative = false;
    for &a in &shapes {
        for &b in &shapes {
            for t in [1, 8, 64] {
                let k = DelayKernel::from_beta(BetaParams::new(a, b).unwrap(), t, 0).unwrap();
                worst = worst.max((k.weights().iter().sum::<f64>() - 1.0).abs());
                negative |= k.weights().iter().any(|&w| w < 0.0);
            }
        }
    }
    let uniform = [1, 8, 64].iter().all(|&t| {
        let k = DelayKernel::from_beta(BetaParams::new(1.0, 1.0).unwrap(), t, 0).unwrap();
        k.weights().iter().all(|&w| (w - 1.0 / t as f64).abs() < 1e-12)
    });
    let lin = DelayKernel::from_beta(BetaParams::new(2.0, 1.0).unwrap(), 2, 0).unwrap();
    let closed = (lin.weight(0) - 0.25).abs() < 1e-9 && (lin.weight(1) - 0.75).abs() < 1e-9;
    let secs = start.elapsed().as_secs_f64();
    let ok = worst < 1e-9 && !negative && uniform && closed && secs < 1.0;
    (ok, format!("max |ΣK−1| = {worst:.1e}, uniform {uniform}, Beta(2,1) {closed}, {secs:.3}s"))
}

fn ledger_equivalence() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.random_range(1..=100);
        let kernels = vec![
            DelayKernel::from_beta(BetaParams::new(rng.random_range(0.5..5.0), rng.random_range(0.5..5.0)).unwrap(), t, 0)
                .unwrap(),
            DelayKernel::from_beta(BetaParams::new(rng.random_range(0.5..5.0), rng.random_range(0.5..5.0)).unwrap(), t, 1)
                .unwrap(),
        ];
        let n = rng.random_range(0..=200);
        let mut history: Vec<AllocationEvent> = (0..n)
            .map(|i| AllocationEvent {
                round: rng.random_range(1..=t),
                individual: i,
                resource: rng.random_range(0..2),
                group: 0,
                base_reward: rng.random_range(-1.0..2.0),
                expected_reward: 0.0,
                predicted_reward: f64::NAN,
                cooldown: 1,
            })
            .collect();
        history.sort_by_key(|e| e.round);
        let mut ledger = RewardLedger::new(t);
        let mut next = 0;
        for round in 1..=t {
            while next < history.len() && history[next].round == round {
                let e = &history[next];
                ledger.post_allocation(e.round, e.base_reward, &kernels[e.resource]).unwrap();
                next += 1;
            }
            let y = ledger.realize(round).unwrap();
            worst = worst.max((y - brute_force_reward(&history[..next], &kernels, round)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (worst < 1e-12 && secs < 5.0, format!("max deviation {worst:.1e} over 100 histories, {secs:.3}s"))
}

type Cell<'a> = BTreeMap<(&'a str, u64), &'a RunResult>;

fn cell<'a>(runs: &'a [RunResult], regime: Regime, kernel: &str, seeds: &[u64]) -> Cell<'a> {
    runs.iter()
        .filter(|r| r.key.regime == regime && r.key.kernel == kernel && seeds.contains(&r.key.seed))
        .map(|r| ((r.key.policy.as_str(), r.key.seed), r))
        .collect()
}

fn final_regrets(c: &Cell<'_>, policy: &str, seeds: &[u64]) -> Vec<f64> {
    seeds.iter().map(|s| c[&(policy, *s)].regret.final_regret()).collect()
}

fn regret_ordering(runs: &[RunResult], seeds: &[u64]) -> (bool, String) {
    let c = cell(runs, Regime::Delayed, "type-i", seeds);
    let (m, ms) = mean_std(&final_regrets(&c, "metacub", seeds));
    let mut ok = true;
    let mut parts = vec![format!("metacub {m:.2}±{ms:.2}")];
    for base in ["ucb", "exp3"] {
        let (b, bs) = mean_std(&final_regrets(&c, base, seeds));
        let pooled = ((ms * ms + bs * bs) / 2.0).sqrt();
        ok &= m < b && b - m > pooled;
        parts.push(format!("{base} {b:.2}±{bs:.2} (gap {:.2}, pooled std {pooled:.2})", b - m));
    }
    (ok, parts.join(", "))
}

fn delay_sensitivity(runs: &[RunResult], seeds: &[u64]) -> (bool, String) {
    let one = cell(runs, Regime::Delayed, "type-i", seeds);
    let two = cell(runs, Regime::Delayed, "type-ii", seeds);
    let mean = |c: &Cell<'_>, p: &str| mean_std(&final_regrets(c, p, seeds)).0;
    let mut ok = true;
    let mut parts = Vec::new();
    for base in ["ucb", "exp3"] {
        let (a, b) = (mean(&one, base), mean(&two, base));
        ok &= b >= a;
        parts.push(format!("{base} type-i {a:.2} type-ii {b:.2}"));
    }
    let rel = |p: &str| (mean(&two, p) - mean(&one, p)) / mean(&one, p);
    let (rm, ru) = (rel("metacub"), rel("ucb"));
    ok &= rm < ru;
    parts.push(format!("relative change metacub {rm:+.3} ucb {ru:+.3}"));
    (ok, parts.join(", "))
}

fn fairness_parity(runs: &[RunResult], cfg: &ExperimentConfig, seeds: &[u64]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (regime, kernel) in cfg.cells() {
        let c = cell(runs, regime, &kernel, seeds);
        let ratios = |p: &str| {
            let rs: Vec<&RunResult> = seeds.iter().map(|s| c[&(p, *s)]).collect();
            mean_fairness(&rs).expect("policy allocated")
        };
        let dev = |r: &[f64]| r.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
        let (meta, flat) = (ratios("metacub"), ratios("ccucb"));
        let in_band = meta.iter().all(|r| (0.8..=1.2).contains(r));
        ok &= in_band && dev(&meta) < dev(&flat);
        let shown: Vec<String> = meta.iter().map(|r| format!("{r:.3}")).collect();
        parts.push(format!(
            "{regime}/{kernel} metacub [{}] dev {:.3} vs ccucb {:.3}",
            shown.join(" "),
            dev(&meta),
            dev(&flat)
        ));
    }
    (ok, parts.join("; "))
}

fn disparity_direction(runs: &[RunResult], seeds: &[u64]) -> (bool, String) {
    let c = cell(runs, Regime::Delayed, "type-i", seeds);
    let wins = seeds.iter().filter(|s| c[&("metacub", **s)].disparity < c[&("ccucb", **s)].disparity).count();
    (wins >= 16, format!("metacub below ccucb in {wins}/{} seeds", seeds.len()))
}

fn degeneracy(cfg: &ExperimentConfig) -> (bool, String) {
    let mut matches = 0;
    for seed in 0..10u64 {
        let ctx = SeedContext::build(cfg, seed).unwrap();
        let env = ctx.environment(cfg, Regime::Delayed, "type-i").unwrap();
        let actions = |key: &str, params: &PolicyParams| {
            let mut p = build_policy(key, PolicyInputs { env: &env, params, model: None, seed }).unwrap();
            let trace = run_episode(&env, p.as_mut(), seed).unwrap();
            trace.events.iter().map(|e| (e.round, e.action())).collect::<Vec<_>>()
        };
        let ucb = actions("ucb", &cfg.policy);
        let ducb = actions("ducb", &PolicyParams { gamma: 1.0, ..cfg.policy.clone() });
        let swucb = actions("swucb", &PolicyParams { window: cfg.horizon, ..cfg.policy.clone() });
        matches += usize::from(ucb == ducb && ucb == swucb);
    }
    (matches == 10, format!("{matches}/10 runs identical"))
}

fn planted_recovery() -> (bool, String) {
    let start = Instant::now();
    let (n_groups, n_resources, size) = (4, 2, 10);
    let groups: Vec<Vec<usize>> = (0..n_groups).map(|k| (k * size..(k + 1) * size).collect()).collect();
    let mut hits = 0;
    for seed in 0..20u64 {
        let planted = (seed as usize % n_groups, (seed as usize / n_groups) % n_resources);
        let preds = CohortPredictions::new(&groups, n_resources, |i, r| f64::from(u8::from((i / size, r) == planted)));
        let out = meta_optimize(&MetaOptimizerConfig::default(), &preds, seed, &[0]).unwrap();
        hits += usize::from(out.best.argmax_cell() == planted);
    }
    let secs = start.elapsed().as_secs_f64();
    (hits >= 18 && secs < 60.0, format!("{hits}/20 seeds, {secs:.2}s"))
}

/// Relative error with the scale floored at 1e-6 for near-zero components.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn gradient_checks() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for inst in 0..20u64 {
        let dim = rng.random_range(1..=5);
        let n = rng.random_range(5..=30);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();

        let p: Vec<f64> = (0..=dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l2 = 1e-2;
        let g = logistic_gradient(&p, &xs, &ys, l2);
        for k in 0..p.len() {
            let (mut hi, mut lo) = (p.clone(), p.clone());
            hi[k] += h;
            lo[k] -= h;
            let fd = (logistic_loss(&hi, &xs, &ys, l2) - logistic_loss(&lo, &xs, &ys, l2)) / (2.0 * h);
            worst = worst.max(rel_err(g[k], fd));
        }

        let head = if inst % 2 == 0 { MlpHead::Regression } else { MlpHead::Probability };
        let m = MlpModel::init(dim, rng.random_range(2..=8), head, inst);
        let p = m.params().to_vec();
        let (_, g) = m.loss_and_gradient(&p, &xs, &ys);
        for k in 0..p.len() {
            let (mut hi, mut lo) = (p.clone(), p.clone());
            hi[k] += h;
            lo[k] -= h;
            let fd = (m.loss(&hi, &xs, &ys) - m.loss(&lo, &xs, &ys)) / (2.0 * h);
            worst = worst.max(rel_err(g[k], fd));
        }
    }
    (worst < 1e-3, format!("max relative error {worst:.1e} over 20 logistic and 20 network instances"))
}

fn reproducibility(cfg: &ExperimentConfig) -> (bool, String) {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let cfg = ExperimentConfig { output_dir: d.path().to_path_buf(), seeds: vec![0, 1], ..cfg.clone() };
        run_experiment(&cfg).unwrap();
    }
    let csvs: Vec<&str> = REPORT_FILES.iter().copied().filter(|f| f.ends_with(".csv")).collect();
    let same = csvs
        .iter()
        .filter(|f| std::fs::read(dirs[0].path().join(f)).unwrap() == std::fs::read(dirs[1].path().join(f)).unwrap())
        .count();
    (same == csvs.len(), format!("{same}/{} report files byte-identical", csvs.len()))
}

#[test]
fn acceptance() {
    let mut v = Verdicts(Vec::new());
    let (ok, d) = kernel_correctness();
    v.record("kernel correctness", ok, d);
    let (ok, d) = ledger_equivalence();
    v.record("ledger oracle equivalence", ok, d);

    let desk = desk();
    let grid_cfg = ExperimentConfig { seeds: (0..50).collect(), ..desk.clone() };
    let start = Instant::now();
    let grid = run_grid(&grid_cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let violations: usize = grid.runs.iter().map(|r| r.violations.len()).sum();
    let per_policy = grid_cfg.seeds.len() * grid_cfg.cells().len();
    let complete = POLICY_KEYS.iter().all(|p| grid.runs.iter().filter(|r| r.key.policy == *p).count() == per_policy);
    v.record(
        "constraint soundness",
        violations == 0 && complete && secs < 300.0,
        format!("{} runs (50 seeds × 9 policies × {} cells), {violations} violations, {secs:.1}s", grid.runs.len(), grid_cfg.cells().len()),
    );

    let seeds = &desk.seeds;
    let (ok, d) = regret_ordering(&grid.runs, seeds);
    v.record("regret ordering", ok, d);
    let (ok, d) = delay_sensitivity(&grid.runs, seeds);
    v.record("delay-structure sensitivity", ok, d);
    let (ok, d) = fairness_parity(&grid.runs, &desk, seeds);
    v.record("fairness parity", ok, d);
    let (ok, d) = disparity_direction(&grid.runs, seeds);
    v.record("disparity direction", ok, d);
    let (ok, d) = degeneracy(&desk);
    v.record("degeneracy identities", ok, d);
    let (ok, d) = planted_recovery();
    v.record("planted-optimum recovery", ok, d);
    let (ok, d) = gradient_checks();
    v.record("model gradient checks", ok, d);
    let (ok, d) = reproducibility(&desk);
    v.record("reproducibility", ok, d);

    let failed: Vec<&str> = v.0.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
    println!("{}/{} criteria pass", v.0.len() - failed.len(), v.0.len());
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
