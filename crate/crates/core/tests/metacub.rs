mod common;

use metacub::env::audit_trace;
use metacub::experiment::{run_one, SeedContext};
use metacub::metacub::{simulate_utility, CohortPredictions, MetaPolicy};
use metacub::types::Regime;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Groups of 10, 6 and 8 members; cells z = [0.1, 0.2 | 0.15, 0.05 | 0.3, 0.2].
fn three_by_two() -> (Vec<Vec<usize>>, MetaPolicy) {
    let groups = vec![(0..10).collect(), (10..16).collect(), (16..24).collect()];
    let z = MetaPolicy::new(3, 2, vec![0.1, 0.2, 0.15, 0.05, 0.3, 0.2]).unwrap();
    (groups, z)
}

/// Constant predictions per cell make the rollout permutation irrelevant.
///
/// Counts are floor(z·n): group 0 gets 1 and 2, group 1 gets 0 and 0, group 2
/// gets 2 and 1. The utility is 0.1·0.7 + 0.2·0.4 + 0.3·0.9 + 0.2·0.3 = 0.48,
/// with group 1 contributing nothing.
#[test]
fn rollout_matches_hand_expansion_for_constant_cells() {
    let (groups, z) = three_by_two();
    let table = [[0.7, 0.4], [5.0, 5.0], [0.9, 0.3]];
    let group_of = |i: usize| if i < 10 { 0 } else if i < 16 { 1 } else { 2 };
    let preds = CohortPredictions::new(&groups, 2, |i, r| table[group_of(i)][r]);
    let u = simulate_utility(&z, &preds, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    assert!((u - 0.48).abs() < 1e-12, "{u}");
}

/// With member-specific predictions the expansion replays the same shuffle
/// and averages each cell's recipients by hand.
#[test]
fn rollout_matches_hand_expansion_with_fixed_rng() {
    let (groups, z) = three_by_two();
    let pred = |i: usize, r: usize| ((i * 7 + r * 3) % 11) as f64 / 10.0;
    let preds = CohortPredictions::new(&groups, 2, pred);
    let got = simulate_utility(&z, &preds, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let counts = [[1, 2], [0, 0], [2, 1]];
    let mut want = 0.0;
    for (k, members) in groups.iter().enumerate() {
        let mut perm: Vec<usize> = (0..members.len()).collect();
        perm.shuffle(&mut rng);
        let mut offset = 0;
        for r in 0..2 {
            let n = counts[k][r];
            if n == 0 {
                continue;
            }
            let mean = perm[offset..offset + n].iter().map(|&m| pred(members[m], r)).sum::<f64>() / n as f64;
            want += z.get(k, r) * mean;
            offset += n;
        }
    }
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn full_runs_pass_the_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::small_config(dir.path(), &["metacub"], &[0, 1, 2], 60);
    for &seed in &cfg.seeds {
        let ctx = SeedContext::build(&cfg, seed).unwrap();
        for (regime, kernel) in cfg.cells() {
            let run = run_one(&cfg, &ctx, regime, &kernel, "metacub").unwrap();
            assert!(!run.trace.events.is_empty());
            assert!(run.violations.is_empty(), "{:?}", run.violations);
            let env = ctx.environment(&cfg, regime, &kernel).unwrap();
            assert!(audit_trace(&run.trace.events, &env.audit_config()).is_empty());
            assert_eq!(run.trace.meta.len(), env.schedule().n_cohorts());
            if regime == Regime::Delayed {
                assert!(run.trace.meta.iter().all(|m| m.deployed.total() <= 1.0 + 1e-9));
            }
        }
    }
}
