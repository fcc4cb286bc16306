//! L2-regularized logistic regression by full-batch gradient descent.
//!
//! Features are standardized internally (constant features map to 0), the
//! bias starts at the training-set log odds, and descent stops early once
//! the gradient max-norm drops below 1e-6. No randomness is involved, so a
//! fit is a pure function of its inputs.

use super::LogRegConfig;
use crate::data::AbundanceTable;
use crate::error::{Error, Result};
use crate::exprtree::sigmoid;
use serde::{Deserialize, Serialize};

const GRADIENT_TOLERANCE: f64 = 1e-6;

/// Weights live in standardized feature space; the standardization constants
/// are carried alongside so raw rows can be scored directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub iterations_run: usize,
}

impl LogRegModel {
    fn standardized(&self, row: &[f64], j: usize) -> f64 {
        if self.stds[j] == 0.0 {
            0.0
        } else {
            (row[j] - self.means[j]) / self.stds[j]
        }
    }

    pub fn decision_value(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.weights.len()
            )));
        }
        let mut z = self.bias;
        for j in 0..row.len() {
            z += self.weights[j] * self.standardized(row, j);
        }
        Ok(z)
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        rows.iter()
            .map(|row| Ok(u8::from(sigmoid(self.decision_value(row)?) >= 0.5)))
            .collect()
    }
}

/// The regularized objective: mean log loss plus `l2/2 * ||w||^2` (the bias
/// is not penalized).
pub fn logreg_loss(
    values: &[Vec<f64>],
    labels: &[u8],
    model: &LogRegModel,
    l2: f64,
) -> Result<f64> {
    let n = values.len();
    let mut loss = 0.0;
    for (row, &y) in values.iter().zip(labels) {
        let p = sigmoid(model.decision_value(row)?).clamp(1e-15, 1.0 - 1e-15);
        loss -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    loss /= n as f64;
    loss += 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
    Ok(loss)
}

/// Analytic gradient of [`logreg_loss`] in (weights, bias) order.
pub fn logreg_gradient(
    values: &[Vec<f64>],
    labels: &[u8],
    model: &LogRegModel,
    l2: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = values.len();
    let f = model.weights.len();
    let mut grad_w = vec![0.0; f];
    let mut grad_b = 0.0;
    for (row, &y) in values.iter().zip(labels) {
        let residual = sigmoid(model.decision_value(row)?) - f64::from(y);
        grad_b += residual;
        for (j, g) in grad_w.iter_mut().enumerate() {
            *g += residual * model.standardized(row, j);
        }
    }
    for (j, g) in grad_w.iter_mut().enumerate() {
        *g = *g / n as f64 + l2 * model.weights[j];
    }
    Ok((grad_w, grad_b / n as f64))
}

/// Fits the model on a table with binary labels.
pub fn fit_logreg(
    table: &AbundanceTable,
    labels: &[u8],
    cfg: &LogRegConfig,
) -> Result<LogRegModel> {
    if labels.len() != table.n_samples() {
        return Err(Error::Dimension(format!(
            "{} labels for {} samples",
            labels.len(),
            table.n_samples()
        )));
    }
    let n = table.n_samples();
    if n == 0 {
        return Err(Error::Fit("cannot fit on an empty table".to_string()));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::Fit(
            "labels contain a single class; nothing to separate".to_string(),
        ));
    }
    if cfg.learning_rate <= 0.0 {
        return Err(Error::Config(format!(
            "learning_rate must be positive, got {}",
            cfg.learning_rate
        )));
    }

    let f = table.n_features();
    let mut means = vec![0.0; f];
    let mut stds = vec![0.0; f];
    for j in 0..f {
        let mean = table.values.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = table
            .values
            .iter()
            .map(|r| (r[j] - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        means[j] = mean;
        stds[j] = var.sqrt();
    }

    // Start at the prevalence log odds so an unstepped model already
    // predicts the majority class.
    let p1 = positives as f64 / n as f64;
    let mut model = LogRegModel {
        weights: vec![0.0; f],
        bias: (p1 / (1.0 - p1)).ln(),
        means,
        stds,
        iterations_run: 0,
    };

    for iter in 0..cfg.max_iterations {
        let (grad_w, grad_b) = logreg_gradient(&table.values, labels, &model, cfg.l2)?;
        let max_norm = grad_w
            .iter()
            .chain(std::iter::once(&grad_b))
            .fold(0.0f64, |m, g| m.max(g.abs()));
        if max_norm < GRADIENT_TOLERANCE {
            break;
        }
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= cfg.learning_rate * g;
        }
        model.bias -= cfg.learning_rate * grad_b;
        model.iterations_run = iter + 1;
    }
    Ok(model)
}
