use rand::Rng;
use rand_distr::Exp1;

use crate::error::{param, Result};
use crate::types::{GroupId, ResourceId};

/// Sub-budget fractions `z̄^k_r` over (group, resource) cells, stored
/// group-major. Nonnegative with total at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaPolicy {
    n_groups: usize,
    n_resources: usize,
    cells: Vec<f64>,
}

impl MetaPolicy {
    pub fn new(n_groups: usize, n_resources: usize, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != n_groups * n_resources || cells.is_empty() {
            return Err(param(format!(
                "{} cells do not match {n_groups} groups × {n_resources} resources",
                cells.len()
            )));
        }
        let p = Self { n_groups, n_resources, cells };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(n_groups: usize, n_resources: usize) -> Self {
        Self { n_groups, n_resources, cells: vec![0.0; n_groups * n_resources] }
    }

    /// Uniform draw from the sub-simplex.
    pub fn sample<R: Rng + ?Sized>(n_groups: usize, n_resources: usize, rng: &mut R) -> Self {
        Self { n_groups, n_resources, cells: sample_sub_simplex(n_groups * n_resources, rng) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(param("meta-policy cells must be finite and non-negative"));
        }
        let total = self.total();
        if total > 1.0 + 1e-9 {
            return Err(param(format!("meta-policy mass {total} exceeds 1")));
        }
        Ok(())
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn n_resources(&self) -> usize {
        self.n_resources
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, k: GroupId, r: ResourceId) -> f64 {
        self.cells[k * self.n_resources + r]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// `Z_r = Σ_k z̄^k_r`.
    pub fn column_sum(&self, r: ResourceId) -> f64 {
        (0..self.n_groups).map(|k| self.get(k, r)).sum()
    }

    /// Cell with the most mass (first on ties).
    pub fn argmax_cell(&self) -> (GroupId, ResourceId) {
        let k = crate::policy::argmax_first(self.cells.iter().copied()).unwrap_or(0);
        (k / self.n_resources, k % self.n_resources)
    }

    /// Blend each resource column toward group shares:
    /// `γ·w_k·Z_r + (1-γ)·z̄^k_r`. Column sums, hence the total, are unchanged
    /// when the shares sum to one.
    pub fn with_coverage(&self, shares: &[f64], gamma: f64) -> Self {
        let mut cells = self.cells.clone();
        for r in 0..self.n_resources {
            let z_r = self.column_sum(r);
            for (k, w) in shares.iter().enumerate().take(self.n_groups) {
                let c = &mut cells[k * self.n_resources + r];
                *c = gamma * w * z_r + (1.0 - gamma) * *c;
            }
        }
        Self { n_groups: self.n_groups, n_resources: self.n_resources, cells }
    }
}

/// Uniform sample of `{z ≥ 0 : Σz ≤ 1}` in `dim` coordinates: a symmetric
/// Dirichlet draw on `dim + 1` components with the slack dropped.
pub fn sample_sub_simplex<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..=dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    e[..dim].iter().map(|v| v / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dirichlet_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mean = [0.0; 4];
        for _ in 0..10_000 {
            let z = sample_sub_simplex(4, &mut rng);
            assert!(z.iter().all(|v| *v >= 0.0) && z.iter().sum::<f64>() <= 1.0 + 1e-12);
            for (m, v) in mean.iter_mut().zip(&z) {
                *m += v / 10_000.0;
            }
        }
        for m in mean {
            assert!((m - 0.2).abs() < 0.02, "{m}");
        }
    }

    #[test]
    fn one_dimensional_draw_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..20_000).map(|_| sample_sub_simplex(1, &mut rng)[0]).collect();
        let below = xs.iter().filter(|x| **x < 0.25).count() as f64 / xs.len() as f64;
        assert!((below - 0.25).abs() < 0.015);
    }

    #[test]
    fn invariants_checked() {
        assert!(MetaPolicy::new(1, 2, vec![0.7, 0.4]).is_err());
        assert!(MetaPolicy::new(1, 2, vec![-0.1, 0.4]).is_err());
        assert!(MetaPolicy::new(1, 2, vec![0.6, 0.4]).is_ok());
    }

    #[test]
    fn coverage_keeps_columns() {
        let z = MetaPolicy::new(2, 2, vec![0.5, 0.1, 0.0, 0.3]).unwrap();
        let c = z.with_coverage(&[0.5, 0.5], 0.8);
        for r in 0..2 {
            assert!((c.column_sum(r) - z.column_sum(r)).abs() < 1e-15);
        }
        assert!((c.get(1, 0) - 0.8 * 0.5 * 0.5).abs() < 1e-15);
        assert_eq!(z.with_coverage(&[0.5, 0.5], 0.0), z);
    }
}
