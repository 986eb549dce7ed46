//! The delayed-reward ledger: allocations post their reward through a
//! kernel, each round realizes what is scheduled for it, and mass past the
//! horizon is counted as lost. The incremental ledger is checked against
//! the direct double sum.

use metacub::delay::{brute_force_reward, DelayKernel, RewardLedger};
use metacub::types::AllocationEvent;

fn event(round: usize, resource: usize, reward: f64) -> AllocationEvent {
    AllocationEvent {
        round,
        individual: 0,
        resource,
        group: 0,
        base_reward: reward,
        expected_reward: reward,
        predicted_reward: f64::NAN,
        cooldown: 1,
    }
}

fn main() -> metacub::Result<()> {
    let horizon = 6;
    let kernels = vec![
        DelayKernel::from_weights(0, vec![0.1, 0.4, 0.3, 0.2, 0.0, 0.0])?,
        DelayKernel::immediate(horizon, 1)?,
    ];
    let history = vec![event(1, 0, 1.0), event(2, 1, 0.5), event(4, 0, 2.0), event(6, 0, 1.0)];

    let mut ledger = RewardLedger::new(horizon);
    let mut posted = 0;
    for t in 1..=horizon {
        while posted < history.len() && history[posted].round == t {
            let e = &history[posted];
            ledger.post_allocation(e.round, e.base_reward, &kernels[e.resource])?;
            posted += 1;
        }
        let y = ledger.realize(t)?;
        let direct = brute_force_reward(&history, &kernels, t);
        println!("t={t}: y = {y:.3} (direct sum {direct:.3})");
    }
    println!("posted {:.3}, lost past the horizon {:.3}", ledger.posted_total(), ledger.lost_mass());
    Ok(())
}
