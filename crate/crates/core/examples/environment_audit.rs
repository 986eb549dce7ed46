//! The constrained environment: a random feasible policy plays a small
//! population, then the independent auditor checks the trace. A forged
//! event inside a cooldown window shows what a violation looks like.

use metacub::env::{audit_trace, CohortSchedule, EnvOptions, EnvState, Environment, IndividualRecord, ResourceSpec};
use metacub::delay::{BetaParams, DelayKernel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> metacub::Result<()> {
    let (horizon, block) = (40, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let individuals: Vec<IndividualRecord> = (0..24)
        .map(|id| IndividualRecord {
            id,
            group: id % 3,
            features: vec![rng.random_range(-1.0..1.0)],
            true_means: vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)],
        })
        .collect();
    let ids: Vec<usize> = (0..individuals.len()).collect();
    let schedule = CohortSchedule::build(&ids, block, horizon, &mut rng)?;
    let resources = (0..2)
        .map(|r| {
            Ok(ResourceSpec {
                id: r,
                budget: 15,
                kernel: DelayKernel::from_beta(BetaParams::new(2.0, 5.0)?, horizon, r)?,
                cooldown_support: vec![1, 2, 3],
            })
        })
        .collect::<metacub::Result<Vec<_>>>()?;
    let env = Environment::new(individuals, resources, schedule, EnvOptions::default())?;

    let mut state = EnvState::new(&env, 9);
    let mut total = 0.0;
    while !state.is_finished(&env) {
        let mut eligible = state.eligible_actions(&env);
        eligible.shuffle(&mut rng);
        let mut taken = vec![false; env.individuals().len()];
        let mut left = state.remaining_budgets().to_vec();
        let actions: Vec<_> = eligible
            .into_iter()
            .filter(|a| {
                let ok = rng.random::<f64>() < 0.2 && !taken[a.individual] && left[a.resource] > 0;
                if ok {
                    taken[a.individual] = true;
                    left[a.resource] -= 1;
                }
                ok
            })
            .collect();
        total += state.apply_allocations(&env, &actions, None)?.realized;
    }
    let history = state.history().to_vec();
    println!("{} allocations, realized reward {total:.3}, budgets left {:?}", history.len(), state.remaining_budgets());
    println!("audit: {} violations", audit_trace(&history, &env.audit_config()).len());

    let mut forged = history.clone();
    let mut again = forged[0].clone();
    again.round += 1;
    forged.push(again);
    for v in audit_trace(&forged, &env.audit_config()) {
        println!("forged trace: {v}");
    }
    Ok(())
}
