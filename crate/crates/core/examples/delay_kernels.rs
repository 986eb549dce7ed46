//! Discretized Beta delay kernels: a peaked and a dispersed profile, a
//! mixture, and how much of each lands inside the horizon when allocated
//! late.

use metacub::delay::{BetaParams, DelayKernel};

fn summary(name: &str, k: &DelayKernel, horizon: usize) {
    let mode = k.weights().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(t, _)| t);
    let mean: f64 = k.weights().iter().enumerate().map(|(t, w)| t as f64 * w).sum();
    println!(
        "{name:<24} mode τ={mode:<3} mean τ={mean:6.1}  mass within 50 rounds {:.3}  kept if allocated at t=400: {:.3}",
        k.mass_within(50),
        k.in_horizon_mass(400, horizon)
    );
}

fn main() -> metacub::Result<()> {
    let horizon = 500;
    let peaked = DelayKernel::from_beta(BetaParams::new(2.0, 8.0)?, horizon, 0)?;
    let dispersed = DelayKernel::from_beta(BetaParams::new(1.2, 1.5)?, horizon, 0)?;
    let bimodal = DelayKernel::mixture(
        &[(0.5, BetaParams::new(1.5, 4.0)?), (0.5, BetaParams::new(4.0, 1.5)?)],
        horizon,
        1,
    )?;
    summary("Beta(2, 8)", &peaked, horizon);
    summary("Beta(1.2, 1.5)", &dispersed, horizon);
    summary("mixture of two Betas", &bimodal, horizon);

    let small = DelayKernel::from_beta(BetaParams::new(2.0, 1.0)?, 2, 0)?;
    println!("Beta(2, 1) over two bins: {:?}", small.weights());
    Ok(())
}
