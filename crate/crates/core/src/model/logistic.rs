use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::ridge::{dot, gram_inverse};

/// Binary logistic regression fitted by full-batch gradient descent on the
/// mean negative log-likelihood plus `l2/2 · |w|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) gram_inv: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct LogisticOptions {
    pub l2: f64,
    pub step: f64,
    pub max_epochs: usize,
    pub grad_tol: f64,
    pub gram_lambda: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { l2: 1e-4, step: 1.0, max_epochs: 5000, grad_tol: 1e-8, gram_lambda: 1.0 }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-[y ln p + (1-y) ln(1-p)]` computed from the logit.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    // ln(1 + e^z) - y z, stable for both signs
    let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
    softplus - y * z
}

impl LogisticModel {
    pub fn zeros(dim: usize) -> Self {
        Self { weights: vec![0.0; dim], bias: 0.0, gram_inv: DMatrix::identity(dim, dim) }
    }

    pub fn fit(xs: &[Vec<f64>], ys: &[f64], opts: &LogisticOptions) -> Result<Self> {
        let mut model = Self::zeros(xs[0].len());
        model.train(xs, ys, opts, opts.max_epochs)?;
        model.gram_inv = gram_inverse(xs, opts.gram_lambda)?;
        Ok(model)
    }

    /// Continue gradient descent from the current parameters.
    pub fn train(&mut self, xs: &[Vec<f64>], ys: &[f64], opts: &LogisticOptions, epochs: usize) -> Result<()> {
        let mut params = self.params();
        for _ in 0..epochs {
            let g = logistic_gradient(&params, xs, ys, opts.l2);
            let gmax = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if !gmax.is_finite() {
                return Err(Error::Fit("logistic gradient diverged".into()));
            }
            if gmax < opts.grad_tol {
                break;
            }
            for (p, gi) in params.iter_mut().zip(&g) {
                *p -= opts.step * gi;
            }
        }
        self.set_params(&params);
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.bias + dot(&self.weights, x))
    }

    /// Flat parameter vector `[w..., b]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.push(self.bias);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let d = self.weights.len();
        self.weights.copy_from_slice(&p[..d]);
        self.bias = p[d];
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Training objective at flat parameters `[w..., b]`.
pub fn logistic_loss(params: &[f64], xs: &[Vec<f64>], ys: &[f64], l2: f64) -> f64 {
    let d = params.len() - 1;
    let (w, b) = (&params[..d], params[d]);
    let n = xs.len() as f64;
    let nll: f64 = xs.iter().zip(ys).map(|(x, y)| bce_from_logit(b + dot(w, x), *y)).sum();
    nll / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Analytic gradient of [`logistic_loss`].
pub fn logistic_gradient(params: &[f64], xs: &[Vec<f64>], ys: &[f64], l2: f64) -> Vec<f64> {
    let d = params.len() - 1;
    let (w, b) = (&params[..d], params[d]);
    let n = xs.len() as f64;
    let mut g = vec![0.0; d + 1];
    for (x, y) in xs.iter().zip(ys) {
        let r = sigmoid(b + dot(w, x)) - y;
        for j in 0..d {
            g[j] += r * x[j];
        }
        g[d] += r;
    }
    for j in 0..d {
        g[j] = g[j] / n + l2 * w[j];
    }
    g[d] /= n;
    g
}
