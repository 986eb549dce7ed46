use crate::delay::beta::{regularized_beta_cdf, BetaParams};
use crate::error::{param, Result};
use crate::types::ResourceId;

const MASS_TOL: f64 = 1e-9;

/// Discretized per-resource delay kernel: `weights[τ]` is the share of an
/// allocation's reward observed `τ` rounds after the allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayKernel {
    resource: ResourceId,
    weights: Vec<f64>,
}

impl DelayKernel {
    /// Beta density integrated over `horizon` equal-width bins of `[0, 1]`.
    pub fn from_beta(p: BetaParams, horizon: usize, resource: ResourceId) -> Result<Self> {
        p.validate()?;
        check_horizon(horizon)?;
        let t = horizon as f64;
        let mut prev = 0.0;
        let mut weights = Vec::with_capacity(horizon);
        for tau in 0..horizon {
            let upper = if tau + 1 == horizon {
                1.0
            } else {
                regularized_beta_cdf((tau + 1) as f64 / t, p)?
            };
            weights.push((upper - prev).max(0.0));
            prev = upper;
        }
        Self::normalized(resource, weights)
    }

    /// Convex combination of Beta kernels.
    pub fn mixture(
        components: &[(f64, BetaParams)],
        horizon: usize,
        resource: ResourceId,
    ) -> Result<Self> {
        check_horizon(horizon)?;
        if components.is_empty() {
            return Err(param("mixture kernel needs at least one component"));
        }
        let mut total = 0.0;
        for (w, _) in components {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(param(format!("mixture weight must be >= 0, got {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(param(format!("mixture weights must sum to 1, got {total}")));
        }
        let mut weights = vec![0.0; horizon];
        for (w, p) in components {
            let k = Self::from_beta(*p, horizon, resource)?;
            for (acc, v) in weights.iter_mut().zip(&k.weights) {
                *acc += w * v;
            }
        }
        Self::normalized(resource, weights)
    }

    /// All mass at lag zero.
    pub fn immediate(horizon: usize, resource: ResourceId) -> Result<Self> {
        check_horizon(horizon)?;
        let mut weights = vec![0.0; horizon];
        weights[0] = 1.0;
        Ok(Self { resource, weights })
    }

    /// Arbitrary normalized kernel; weights must be nonnegative with unit mass.
    pub fn from_weights(resource: ResourceId, weights: Vec<f64>) -> Result<Self> {
        check_horizon(weights.len())?;
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(param("kernel weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(param(format!("kernel weights must sum to 1, got {sum}")));
        }
        Ok(Self { resource, weights })
    }

    fn normalized(resource: ResourceId, mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(param("kernel has no mass"));
        }
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self { resource, weights })
    }

    pub fn resource(&self) -> ResourceId {
        self.resource
    }

    pub fn horizon(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `K(τ)`, zero outside `0..T`.
    pub fn weight(&self, tau: usize) -> f64 {
        self.weights.get(tau).copied().unwrap_or(0.0)
    }

    /// Mass realized at lags `0..=max_lag`.
    pub fn mass_within(&self, max_lag: usize) -> f64 {
        let end = (max_lag + 1).min(self.weights.len());
        self.weights[..end].iter().sum()
    }

    /// Share of an allocation made at `round` that lands inside `1..=horizon`.
    pub fn in_horizon_mass(&self, round: usize, horizon: usize) -> f64 {
        if round == 0 || round > horizon {
            return 0.0;
        }
        self.mass_within(horizon - round)
    }
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(param("kernel horizon must be >= 1"));
    }
    Ok(())
}
