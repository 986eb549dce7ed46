//! Delay kernels and the delayed-reward ledger.

pub mod beta;
pub mod kernel;
pub mod ledger;

pub use beta::{regularized_beta_cdf, BetaParams};
pub use kernel::DelayKernel;
pub use ledger::{brute_force_reward, RewardLedger};

/// `(resource_id, tau, weight)` rows for a set of kernels.
pub fn kernel_rows(kernels: &[DelayKernel]) -> Vec<(usize, usize, f64)> {
    kernels
        .iter()
        .flat_map(|k| {
            k.weights()
                .iter()
                .enumerate()
                .map(move |(tau, w)| (k.resource(), tau, *w))
        })
        .collect()
}
