//! Outcome predictors `f(x)` with a confidence width for optimistic scoring.
//!
//! Three kinds are available: ridge regression (closed form), logistic
//! regression and a one-hidden-layer tanh network (both gradient descent).
//! A [`PredictorBank`] holds one fitted model per resource.

mod logistic;
mod mlp;
mod ridge;

pub use logistic::{logistic_gradient, logistic_loss, sigmoid, LogisticModel, LogisticOptions};
pub use mlp::{MlpHead, MlpModel, MlpOptimizer, MlpOptions};
pub use ridge::RidgeModel;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ridge,
    Logistic,
    Mlp,
}

impl ModelKind {
    pub fn is_linear(self) -> bool {
        matches!(self, ModelKind::Ridge | ModelKind::Logistic)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Ridge => "ridge",
            ModelKind::Logistic => "logistic",
            ModelKind::Mlp => "mlp",
        })
    }
}

/// Hyperparameters for every model kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub ridge_lambda: f64,
    pub logistic_l2: f64,
    pub logistic_step: f64,
    pub logistic_epochs: usize,
    pub mlp_hidden: usize,
    pub mlp_optimizer: MlpOptimizer,
    pub mlp_step: f64,
    pub mlp_epochs: usize,
    pub mlp_loss_tol: f64,
    /// Epoch budget for warm-started online refits.
    pub refit_epochs: usize,
    /// Use a sigmoid head for the network (binary outcomes).
    pub mlp_probability: bool,
    pub seed: u64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            ridge_lambda: 1.0,
            logistic_l2: 1e-4,
            logistic_step: 1.0,
            logistic_epochs: 3000,
            mlp_hidden: 32,
            mlp_optimizer: MlpOptimizer::Adam,
            mlp_step: 1e-2,
            mlp_epochs: 2000,
            mlp_loss_tol: 1e-7,
            refit_epochs: 100,
            mlp_probability: false,
            seed: 0,
        }
    }
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(param("ridge_lambda must be a finite non-negative number"));
        }
        if !(self.logistic_step > 0.0 && self.mlp_step > 0.0) {
            return Err(param("step sizes must be positive"));
        }
        if self.mlp_hidden == 0 {
            return Err(param("mlp_hidden must be at least 1"));
        }
        Ok(())
    }

    fn logistic(&self) -> LogisticOptions {
        LogisticOptions {
            l2: self.logistic_l2,
            step: self.logistic_step,
            max_epochs: self.logistic_epochs,
            grad_tol: 1e-8,
            gram_lambda: self.ridge_lambda,
        }
    }

    fn mlp(&self) -> MlpOptions {
        MlpOptions {
            optimizer: self.mlp_optimizer,
            hidden: self.mlp_hidden,
            step: self.mlp_step,
            max_epochs: self.mlp_epochs,
            loss_tol: self.mlp_loss_tol,
            seed: self.seed,
        }
    }
}

/// A fitted predictor.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeModel {
    Ridge(RidgeModel),
    Logistic(LogisticModel),
    Mlp(MlpModel),
}

fn check_rows(xs: &[Vec<f64>], ys: &[f64]) -> Result<usize> {
    if xs.is_empty() {
        return Err(param("empty training set"));
    }
    if xs.len() != ys.len() {
        return Err(param(format!("{} feature rows but {} outcomes", xs.len(), ys.len())));
    }
    let dim = xs[0].len();
    for x in xs {
        if x.len() != dim {
            return Err(domain("feature rows have inconsistent dimension"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(domain("non-finite feature value"));
        }
    }
    if ys.iter().any(|v| !v.is_finite()) {
        return Err(domain("non-finite outcome"));
    }
    Ok(dim)
}

impl OutcomeModel {
    pub fn fit(xs: &[Vec<f64>], ys: &[f64], kind: ModelKind, opts: &ModelOptions) -> Result<Self> {
        let dim = check_rows(xs, ys)?;
        if kind.is_linear() && xs.len() < dim + 1 {
            return Err(Error::Fit(format!(
                "{} rows cannot identify a {kind} model with {dim} features",
                xs.len()
            )));
        }
        match kind {
            ModelKind::Ridge => RidgeModel::fit(xs, ys, opts.ridge_lambda).map(Self::Ridge),
            ModelKind::Logistic => {
                if ys.iter().any(|y| !(0.0..=1.0).contains(y)) {
                    return Err(domain("logistic outcomes must lie in [0, 1]"));
                }
                LogisticModel::fit(xs, ys, &opts.logistic()).map(Self::Logistic)
            }
            ModelKind::Mlp => {
                let head = if opts.mlp_probability { MlpHead::Probability } else { MlpHead::Regression };
                MlpModel::fit(xs, ys, head, &opts.mlp()).map(Self::Mlp)
            }
        }
    }

    /// Refine on a larger data set. Ridge is re-solved; the iterative kinds
    /// continue from their current parameters for `opts.refit_epochs`.
    pub fn refit(&self, xs: &[Vec<f64>], ys: &[f64], opts: &ModelOptions) -> Result<Self> {
        let dim = check_rows(xs, ys)?;
        if dim != self.dim() {
            return Err(domain("refit rows do not match the model dimension"));
        }
        match self {
            Self::Ridge(_) => RidgeModel::fit(xs, ys, opts.ridge_lambda).map(Self::Ridge),
            Self::Logistic(m) => {
                let mut m = m.clone();
                let lo = opts.logistic();
                m.train(xs, ys, &lo, opts.refit_epochs)?;
                m.gram_inv = ridge::gram_inverse(xs, lo.gram_lambda)?;
                Ok(Self::Logistic(m))
            }
            Self::Mlp(m) => {
                let mut m = m.clone();
                m.train(xs, ys, &opts.mlp(), opts.refit_epochs)?;
                Ok(Self::Mlp(m))
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Ridge(_) => ModelKind::Ridge,
            Self::Logistic(_) => ModelKind::Logistic,
            Self::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ridge(m) => m.weights.len(),
            Self::Logistic(m) => m.weights.len(),
            Self::Mlp(m) => m.dim,
        }
    }

    /// Whether predictions are probabilities in `[0, 1]`.
    pub fn is_probability(&self) -> bool {
        match self {
            Self::Ridge(_) => false,
            Self::Logistic(_) => true,
            Self::Mlp(m) => m.head == MlpHead::Probability,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(domain(format!(
                "context has dimension {} but the model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Self::Ridge(m) => m.predict(x),
            Self::Logistic(m) => m.predict(x),
            Self::Mlp(m) => m.predict(x),
        }
    }

    /// Confidence width `u`. Linear kinds use the Gram-matrix norm of `x`;
    /// the network uses a count bonus on the (group, resource) cell.
    pub fn uncertainty(&self, x: &[f64], cell_count: u64, t: usize) -> f64 {
        match self {
            Self::Ridge(m) => ridge::confidence_width(&m.gram_inv, x),
            Self::Logistic(m) => ridge::confidence_width(&m.gram_inv, x),
            Self::Mlp(_) => count_bonus(cell_count, t),
        }
    }

    /// Replace the Gram inverse of a linear model (used by tests and tools).
    pub fn with_gram_inverse(mut self, gram_inv: DMatrix<f64>) -> Self {
        match &mut self {
            Self::Ridge(m) => m.gram_inv = gram_inv,
            Self::Logistic(m) => m.gram_inv = gram_inv,
            Self::Mlp(_) => {}
        }
        self
    }
}

/// `sqrt(2 ln t / max(1, n))`.
pub fn count_bonus(cell_count: u64, t: usize) -> f64 {
    let t = t.max(1) as f64;
    (2.0 * t.ln() / cell_count.max(1) as f64).sqrt()
}

/// One model per resource, sharing a feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorBank {
    models: Vec<OutcomeModel>,
}

/// Training row tagged with the resource it was observed under.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub features: Vec<f64>,
    pub resource: usize,
    pub outcome: f64,
}

impl PredictorBank {
    pub fn new(models: Vec<OutcomeModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(param("a predictor bank needs at least one model"));
        }
        let dim = models[0].dim();
        if models.iter().any(|m| m.dim() != dim) {
            return Err(domain("models in a bank must share a dimension"));
        }
        Ok(Self { models })
    }

    /// Fit one model per resource. A resource without enough rows of its own
    /// is fitted on the pooled rows instead.
    pub fn fit(rows: &[TrainingRow], n_resources: usize, kind: ModelKind, opts: &ModelOptions) -> Result<Self> {
        if rows.is_empty() {
            return Err(param("empty training set"));
        }
        let pooled_x: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
        let pooled_y: Vec<f64> = rows.iter().map(|r| r.outcome).collect();
        let dim = pooled_x[0].len();
        let mut models = Vec::with_capacity(n_resources);
        for r in 0..n_resources {
            let (xs, ys): (Vec<_>, Vec<_>) = rows
                .iter()
                .filter(|row| row.resource == r)
                .map(|row| (row.features.clone(), row.outcome))
                .unzip();
            let m = if xs.len() > 2 * (dim + 1) {
                OutcomeModel::fit(&xs, &ys, kind, opts)?
            } else {
                OutcomeModel::fit(&pooled_x, &pooled_y, kind, opts)?
            };
            models.push(m);
        }
        Self::new(models)
    }

    pub fn n_resources(&self) -> usize {
        self.models.len()
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim()
    }

    pub fn model(&self, resource: usize) -> &OutcomeModel {
        &self.models[resource]
    }

    pub fn models(&self) -> &[OutcomeModel] {
        &self.models
    }

    pub fn predict(&self, x: &[f64], resource: usize) -> Result<f64> {
        self.models
            .get(resource)
            .ok_or_else(|| domain(format!("unknown resource {resource}")))?
            .predict(x)
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64], resource: usize) -> f64 {
        self.models[resource].predict_unchecked(x)
    }

    pub fn uncertainty(&self, x: &[f64], resource: usize, cell_count: u64, t: usize) -> f64 {
        self.models[resource].uncertainty(x, cell_count, t)
    }

    /// Refit one resource's model on `rows` (all tagged with that resource).
    pub fn refit_resource(&mut self, resource: usize, xs: &[Vec<f64>], ys: &[f64], opts: &ModelOptions) -> Result<()> {
        let next = self.models[resource].refit(xs, ys, opts)?;
        self.models[resource] = next;
        Ok(())
    }
}
