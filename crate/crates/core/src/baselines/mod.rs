//! Reference classifiers and the shared metric suite.
//!
//! Logistic regression, a CART decision tree, and a bagged random forest,
//! with the parameterizations used by the benchmark protocol (max_iter 500,
//! max_depth 5, 50 trees). Fitted models are immutable, predict concurrently,
//! and serialize to a tagged JSON document.

mod logreg;
mod tree;

pub use logreg::{fit_logreg, LogRegModel};
pub use tree::{fit_cart, fit_forest, CartModel, ForestModel, TreeNode};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

// --- Metrics -------------------------------------------------------------------

/// Accuracy, F1 (positive class = 1), and the confusion matrix behind them.
///
/// `confusion[actual][predicted]`: `[0][0]` = TN, `[0][1]` = FP,
/// `[1][0]` = FN, `[1][1]` = TP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub f1: f64,
    pub confusion: [[usize; 2]; 2],
    pub n: usize,
}

/// Computes accuracy and F1 against the truth. F1 is defined as 0 when its
/// denominator vanishes.
pub fn metrics(pred: &[u8], truth: &[u8]) -> Result<MetricReport> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Dimension("metrics over zero samples".to_string()));
    }
    let mut confusion = [[0usize; 2]; 2];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[usize::from(t == 1)][usize::from(p == 1)] += 1;
    }
    let n = pred.len();
    let tp = confusion[1][1];
    let tn = confusion[0][0];
    let fp = confusion[0][1];
    let fn_ = confusion[1][0];
    let accuracy = (tp + tn) as f64 / n as f64;
    let denom = 2 * tp + fp + fn_;
    let f1 = if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    };
    Ok(MetricReport {
        accuracy,
        f1,
        confusion,
        n,
    })
}

// --- Configuration ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRegConfig {
    pub max_iterations: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for LogRegConfig {
    fn default() -> LogRegConfig {
        LogRegConfig {
            max_iterations: 500,
            learning_rate: 0.1,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeConfig {
    /// `None` grows until purity or `min_samples_split`.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeConfig {
    fn default() -> TreeConfig {
        TreeConfig {
            max_depth: Some(5),
            min_samples_split: 2,
        }
    }
}

/// How many features each forest split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitFeatures {
    /// ceil(sqrt(F)) features sampled uniformly per split.
    Sqrt,
    /// All features, in order (no randomness consumed).
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub split_features: SplitFeatures,
    /// Per-tree growth limits; unbounded by default, as is conventional for
    /// bagged ensembles.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> ForestConfig {
        ForestConfig {
            n_trees: 50,
            bootstrap: true,
            split_features: SplitFeatures::Sqrt,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BaselineConfig {
    pub logreg: LogRegConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.logreg.learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.logreg.learning_rate
            )));
        }
        if self.logreg.l2 < 0.0 {
            return Err(Error::Config(format!(
                "l2 must be non-negative, got {}",
                self.logreg.l2
            )));
        }
        for (what, min_split) in [
            ("tree", self.tree.min_samples_split),
            ("forest", self.forest.min_samples_split),
        ] {
            if min_split < 2 {
                return Err(Error::Config(format!(
                    "{what}.min_samples_split must be at least 2, got {min_split}"
                )));
            }
        }
        if self.tree.max_depth == Some(0) || self.forest.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".to_string()));
        }
        if self.forest.n_trees == 0 {
            return Err(Error::Config("n_trees must be positive".to_string()));
        }
        Ok(())
    }
}

// --- Model serialization -----------------------------------------------------------

/// A fitted baseline, tagged for JSON round-trips and prediction-only reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineModel {
    Logreg(LogRegModel),
    Cart(CartModel),
    Forest(ForestModel),
}

impl BaselineModel {
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        match self {
            BaselineModel::Logreg(m) => m.predict(rows),
            BaselineModel::Cart(m) => m.predict(rows),
            BaselineModel::Forest(m) => m.predict(rows),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<BaselineModel> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("invalid model JSON: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed_rng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn perfect_predictions() {
        let m = metrics(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.f1, 1.0);
        assert_eq!(m.n, 3);
    }

    #[test]
    fn all_negative_predictions_have_zero_f1() {
        let m = metrics(&[0, 0, 0, 0], &[1, 1, 0, 0]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn hand_built_confusion() {
        // TP=1, FP=1, FN=1, TN=1
        let m = metrics(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(m.confusion, [[1, 1], [1, 1]]);
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.f1, 0.5);
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let mut rng = seed_rng(0);
        let pred: Vec<u8> = (0..200).map(|_| rng.gen_range(0..2) as u8).collect();
        let truth: Vec<u8> = (0..200).map(|_| rng.gen_range(0..2) as u8).collect();
        let base = metrics(&pred, &truth).unwrap();
        let mut order: Vec<usize> = (0..200).collect();
        for _ in 0..10 {
            order.shuffle(&mut rng);
            let p: Vec<u8> = order.iter().map(|&i| pred[i]).collect();
            let t: Vec<u8> = order.iter().map(|&i| truth[i]).collect();
            assert_eq!(metrics(&p, &t).unwrap(), base);
        }
    }

    #[test]
    fn metrics_reject_mismatched_lengths() {
        assert!(metrics(&[1], &[1, 0]).is_err());
        assert!(metrics(&[], &[]).is_err());
    }

    #[test]
    fn config_validation() {
        BaselineConfig::default().validate().unwrap();
        let mut cfg = BaselineConfig::default();
        cfg.logreg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = BaselineConfig::default();
        cfg.forest.n_trees = 0;
        assert!(cfg.validate().is_err());
    }
}
