use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::logistic::sigmoid;
use crate::rng::substream;

/// Output head of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlpHead {
    /// Linear output, squared-error loss.
    Regression,
    /// Sigmoid output, cross-entropy loss.
    Probability,
}

/// Update rule for network training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlpOptimizer {
    /// Plain full-batch gradient descent.
    Gd,
    /// Full-batch Adam (β₁=0.9, β₂=0.999).
    Adam,
}

#[derive(Debug, Clone, Copy)]
pub struct MlpOptions {
    pub optimizer: MlpOptimizer,
    pub hidden: usize,
    pub step: f64,
    pub max_epochs: usize,
    pub loss_tol: f64,
    pub seed: u64,
}

impl Default for MlpOptions {
    fn default() -> Self {
        Self { optimizer: MlpOptimizer::Adam, hidden: 32, step: 1e-2, max_epochs: 2000, loss_tol: 1e-7, seed: 0 }
    }
}

/// One hidden layer of tanh units.
///
/// Parameters are stored flat as `[W1 (hidden × dim, row-major), b1, w2, b2]`
/// so the gradient can be checked coordinate by coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) dim: usize,
    pub(crate) hidden: usize,
    pub(crate) head: MlpHead,
    pub(crate) params: Vec<f64>,
}

impl MlpModel {
    pub fn init(dim: usize, hidden: usize, head: MlpHead, seed: u64) -> Self {
        let mut rng = substream(seed, "mlp-init");
        let n = hidden * dim + 2 * hidden + 1;
        let mut params = vec![0.0; n];
        let s1 = 1.0 / (dim.max(1) as f64).sqrt();
        let s2 = 1.0 / (hidden as f64).sqrt();
        for p in &mut params[..hidden * dim] {
            *p = s1 * rng.sample::<f64, _>(StandardNormal);
        }
        for p in &mut params[hidden * dim..hidden * dim + hidden] {
            *p = 0.1 * rng.sample::<f64, _>(StandardNormal);
        }
        for p in &mut params[hidden * dim + hidden..hidden * dim + 2 * hidden] {
            *p = s2 * rng.sample::<f64, _>(StandardNormal);
        }
        Self { dim, hidden, head, params }
    }

    pub fn fit(xs: &[Vec<f64>], ys: &[f64], head: MlpHead, opts: &MlpOptions) -> Result<Self> {
        let mut m = Self::init(xs[0].len(), opts.hidden, head, opts.seed);
        m.train(xs, ys, opts, opts.max_epochs)?;
        Ok(m)
    }

    /// Full-batch training from the current parameters.
    pub fn train(&mut self, xs: &[Vec<f64>], ys: &[f64], opts: &MlpOptions, epochs: usize) -> Result<()> {
        let mut prev = f64::INFINITY;
        let mut m1 = vec![0.0; self.params.len()];
        let mut m2 = vec![0.0; self.params.len()];
        for epoch in 1..=epochs {
            let (loss, g) = self.loss_and_gradient(&self.params, xs, ys);
            if !loss.is_finite() {
                return Err(Error::Fit("mlp loss diverged".into()));
            }
            if (prev - loss).abs() < opts.loss_tol {
                break;
            }
            prev = loss;
            match opts.optimizer {
                MlpOptimizer::Gd => {
                    for (p, gi) in self.params.iter_mut().zip(&g) {
                        *p -= opts.step * gi;
                    }
                }
                MlpOptimizer::Adam => {
                    let (b1, b2) = (0.9_f64, 0.999_f64);
                    let c1 = 1.0 - b1.powi(epoch as i32);
                    let c2 = 1.0 - b2.powi(epoch as i32);
                    for k in 0..g.len() {
                        m1[k] = b1 * m1[k] + (1.0 - b1) * g[k];
                        m2[k] = b2 * m2[k] + (1.0 - b2) * g[k] * g[k];
                        self.params[k] -= opts.step * (m1[k] / c1) / ((m2[k] / c2).sqrt() + 1e-8);
                    }
                }
            }
        }
        Ok(())
    }

    fn raw_output(&self, params: &[f64], x: &[f64], hidden_out: &mut [f64]) -> f64 {
        let (d, h) = (self.dim, self.hidden);
        let b1 = &params[h * d..h * d + h];
        let w2 = &params[h * d + h..h * d + 2 * h];
        let b2 = params[h * d + 2 * h];
        let mut out = b2;
        for j in 0..h {
            let row = &params[j * d..(j + 1) * d];
            let a: f64 = b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            let z = a.tanh();
            hidden_out[j] = z;
            out += w2[j] * z;
        }
        out
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.hidden];
        let o = self.raw_output(&self.params, x, &mut buf);
        match self.head {
            MlpHead::Regression => o,
            MlpHead::Probability => sigmoid(o),
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn head(&self) -> MlpHead {
        self.head
    }

    /// Training objective at arbitrary flat parameters.
    pub fn loss(&self, params: &[f64], xs: &[Vec<f64>], ys: &[f64]) -> f64 {
        self.loss_and_gradient(params, xs, ys).0
    }

    /// Objective and its analytic gradient by backpropagation.
    pub fn loss_and_gradient(&self, params: &[f64], xs: &[Vec<f64>], ys: &[f64]) -> (f64, Vec<f64>) {
        let (d, h) = (self.dim, self.hidden);
        let n = xs.len() as f64;
        let mut g = vec![0.0; params.len()];
        let mut z = vec![0.0; h];
        let mut loss = 0.0;
        let w2_off = h * d + h;
        for (x, &y) in xs.iter().zip(ys) {
            let o = self.raw_output(params, x, &mut z);
            let delta = match self.head {
                MlpHead::Regression => {
                    loss += 0.5 * (o - y) * (o - y);
                    o - y
                }
                MlpHead::Probability => {
                    let sp = if o > 0.0 { o + (-o).exp().ln_1p() } else { o.exp().ln_1p() };
                    loss += sp - y * o;
                    sigmoid(o) - y
                }
            };
            g[h * d + 2 * h] += delta;
            for j in 0..h {
                g[w2_off + j] += delta * z[j];
                let da = delta * params[w2_off + j] * (1.0 - z[j] * z[j]);
                g[h * d + j] += da;
                for (k, xv) in x.iter().enumerate() {
                    g[j * d + k] += da * xv;
                }
            }
        }
        for v in &mut g {
            *v /= n;
        }
        (loss / n, g)
    }
}
