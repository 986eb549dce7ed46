use nalgebra::{DMatrix, DVector};

use crate::env::Environment;
use crate::error::Result;
use crate::policy::attribution::Attribution;
use crate::policy::ucb::Creditor;
use crate::policy::{argmax_first, Feedback, Policy, RoundContext, Selection};

/// LinUCB with one ridge model per resource over individual contexts.
pub struct LinUcbPolicy {
    alpha: f64,
    /// `A_r⁻¹`, starting from the identity.
    a_inv: Vec<DMatrix<f64>>,
    b: Vec<DVector<f64>>,
    creditor: Creditor,
}

impl LinUcbPolicy {
    pub fn new(env: &Environment, alpha: f64, attribution: Attribution) -> Self {
        let d = env.individuals().first().map_or(0, |i| i.features.len());
        let r = env.n_resources();
        Self {
            alpha,
            a_inv: vec![DMatrix::identity(d, d); r],
            b: vec![DVector::zeros(d); r],
            creditor: Creditor::new(attribution, env),
        }
    }

    /// `(θ_r·x, sqrt(xᵀA_r⁻¹x))`.
    pub fn estimate(&self, x: &[f64], r: usize) -> (f64, f64) {
        let x = DVector::from_column_slice(x);
        let ax = &self.a_inv[r] * &x;
        let theta = &self.a_inv[r] * &self.b[r];
        (theta.dot(&x), x.dot(&ax).max(0.0).sqrt())
    }

    fn add_observation(&mut self, x: &[f64], r: usize) {
        // Sherman–Morrison for A + xxᵀ
        let x = DVector::from_column_slice(x);
        let ax = &self.a_inv[r] * &x;
        let denom = 1.0 + x.dot(&ax);
        self.a_inv[r] -= (&ax * ax.transpose()) / denom;
    }
}

impl Policy for LinUcbPolicy {
    fn name(&self) -> &'static str {
        "linucb"
    }

    fn select(&mut self, ctx: &RoundContext<'_>) -> Result<Selection> {
        let est: Vec<(f64, f64)> = ctx.eligible.iter().map(|&a| self.estimate(ctx.features(a), a.resource)).collect();
        let Some(k) = argmax_first(est.iter().map(|(m, w)| m + self.alpha * w)) else {
            return Ok(Selection::default());
        };
        let a = ctx.eligible[k];
        self.add_observation(ctx.features(a), a.resource);
        Ok(Selection { actions: vec![a], predictions: Some(vec![est[k].0]) })
    }

    fn observe(&mut self, fb: &Feedback<'_>) -> Result<()> {
        for (a, c) in self.creditor.credit(fb) {
            let x = DVector::from_column_slice(&fb.env.individual(a.individual).features);
            self.b[a.resource].axpy(c, &x, 1.0);
        }
        Ok(())
    }
}
