use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// L2-regularized least squares with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub(crate) weights: Vec<f64>,
    pub(crate) intercept: f64,
    pub(crate) lambda: f64,
    /// `A⁻¹` for `A = λI + XᵀX`, the confidence-width Gram matrix.
    pub(crate) gram_inv: DMatrix<f64>,
}

impl RidgeModel {
    pub fn fit(xs: &[Vec<f64>], ys: &[f64], lambda: f64) -> Result<Self> {
        let dim = xs[0].len();
        let n = xs.len();
        let xbar: Vec<f64> = (0..dim)
            .map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n as f64)
            .collect();
        let ybar = ys.iter().sum::<f64>() / n as f64;

        let mut xtx = DMatrix::<f64>::zeros(dim, dim);
        let mut xty = DVector::<f64>::zeros(dim);
        for (x, y) in xs.iter().zip(ys) {
            let xc = DVector::from_iterator(dim, x.iter().zip(&xbar).map(|(a, m)| a - m));
            xtx.ger(1.0, &xc, &xc, 1.0);
            xty.axpy(y - ybar, &xc, 1.0);
        }
        for j in 0..dim {
            xtx[(j, j)] += lambda;
        }
        let chol = xtx
            .cholesky()
            .ok_or_else(|| Error::Fit("ridge normal equations are singular".into()))?;
        let w = chol.solve(&xty);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Fit("ridge solution is not finite".into()));
        }
        let weights: Vec<f64> = w.iter().copied().collect();
        let intercept = ybar - weights.iter().zip(&xbar).map(|(a, b)| a * b).sum::<f64>();
        let gram_inv = gram_inverse(xs, lambda)?;
        Ok(Self { weights, intercept, lambda, gram_inv })
    }

    /// Model with explicit parameters; `gram_inv` defaults to the identity.
    pub fn from_parts(weights: Vec<f64>, intercept: f64) -> Self {
        let dim = weights.len();
        Self { weights, intercept, lambda: 1.0, gram_inv: DMatrix::identity(dim, dim) }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + dot(&self.weights, x)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(λI + XᵀX)⁻¹`, with λ floored at 1e-6 so the width is always defined.
pub(crate) fn gram_inverse(xs: &[Vec<f64>], lambda: f64) -> Result<DMatrix<f64>> {
    let dim = xs.first().map_or(0, Vec::len);
    let mut a = DMatrix::<f64>::identity(dim, dim) * lambda.max(1e-6);
    for x in xs {
        let v = DVector::from_column_slice(x);
        a.ger(1.0, &v, &v, 1.0);
    }
    a.try_inverse()
        .ok_or_else(|| Error::Fit("gram matrix is singular".into()))
}

/// `sqrt(xᵀ A⁻¹ x)`.
pub(crate) fn confidence_width(gram_inv: &DMatrix<f64>, x: &[f64]) -> f64 {
    let v = DVector::from_column_slice(x);
    let q = v.dot(&(gram_inv * &v));
    q.max(0.0).sqrt()
}
