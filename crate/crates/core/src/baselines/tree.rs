//! Greedy CART with Gini impurity, and bagging on top of it.
//!
//! Thresholds are midpoints of consecutive distinct feature values, searched
//! exhaustively; ties keep the first (lowest feature index, then lowest
//! threshold). Impure nodes split even on zero Gini gain as long as a valid
//! threshold exists, so unlimited-depth trees always reach purity on
//! distinct rows. Rows go left when `value <= threshold`.

use super::{ForestConfig, SplitFeatures, TreeConfig};
use crate::data::AbundanceTable;
use crate::error::{Error, Result};
use crate::seed_rng;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        class: u8,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        match self {
            TreeNode::Leaf { class } => *class,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.predict_row(row)
                } else {
                    right.predict_row(row)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartModel {
    pub root: TreeNode,
    pub n_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub n_features: usize,
}

impl CartModel {
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        check_width(rows, self.n_features)?;
        Ok(rows.iter().map(|r| self.root.predict_row(r)).collect())
    }
}

impl ForestModel {
    /// Majority vote across trees; an exact tie predicts class 0.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        check_width(rows, self.n_features)?;
        Ok(rows
            .iter()
            .map(|r| {
                let ones: usize = self
                    .trees
                    .iter()
                    .map(|t| usize::from(t.predict_row(r)))
                    .sum();
                u8::from(2 * ones > self.trees.len())
            })
            .collect())
    }
}

fn check_width(rows: &[Vec<f64>], n_features: usize) -> Result<()> {
    if let Some(bad) = rows.iter().find(|r| r.len() != n_features) {
        return Err(Error::Dimension(format!(
            "row has {} features, model expects {n_features}",
            bad.len()
        )));
    }
    Ok(())
}

// --- Growing -------------------------------------------------------------------

#[derive(Clone, Copy)]
enum FeaturePick {
    All,
    /// Uniform sample of this many distinct candidate features per split.
    Random(usize),
}

fn majority(labels: &[u8], rows: &[usize]) -> (u8, bool) {
    let ones = rows.iter().filter(|&&i| labels[i] == 1).count();
    let zeros = rows.len() - ones;
    // Ties resolve to class 0.
    (u8::from(ones > zeros), ones == 0 || zeros == 0)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn weighted_gini(l0: usize, l1: usize, r0: usize, r1: usize) -> f64 {
    let gini = |a: usize, b: usize| {
        let n = (a + b) as f64;
        let pa = a as f64 / n;
        let pb = b as f64 / n;
        1.0 - pa * pa - pb * pb
    };
    let nl = (l0 + l1) as f64;
    let nr = (r0 + r1) as f64;
    (nl * gini(l0, l1) + nr * gini(r0, r1)) / (nl + nr)
}

fn best_split_for_feature(
    values: &[Vec<f64>],
    labels: &[u8],
    rows: &[usize],
    feature: usize,
) -> Option<(f64, f64)> {
    let mut pairs: Vec<(f64, u8)> = rows.iter().map(|&i| (values[i][feature], labels[i])).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("table values are finite"));

    let total1: usize = pairs.iter().filter(|(_, y)| *y == 1).count();
    let total0 = pairs.len() - total1;

    let mut best: Option<(f64, f64)> = None;
    let mut l0 = 0usize;
    let mut l1 = 0usize;
    for w in 0..pairs.len() - 1 {
        if pairs[w].1 == 1 {
            l1 += 1;
        } else {
            l0 += 1;
        }
        let (v, next) = (pairs[w].0, pairs[w + 1].0);
        if v == next {
            continue;
        }
        // Midpoints of float-adjacent values can round onto `next`, which
        // would empty the right side; fall back to `v` so v <= t < next.
        let mid = v + (next - v) / 2.0;
        let threshold = if mid < next { mid } else { v };
        let impurity = weighted_gini(l0, l1, total0 - l0, total1 - l1);
        match best {
            Some((_, cur)) if impurity >= cur => {}
            _ => best = Some((threshold, impurity)),
        }
    }
    best
}

fn find_best_split<R: Rng>(
    values: &[Vec<f64>],
    labels: &[u8],
    rows: &[usize],
    n_features: usize,
    pick: FeaturePick,
    rng: &mut R,
) -> Option<BestSplit> {
    let candidates: Vec<usize> = match pick {
        FeaturePick::Random(m) if m < n_features => {
            let mut c = index::sample(rng, n_features, m).into_vec();
            c.sort_unstable();
            c
        }
        _ => (0..n_features).collect(),
    };
    let mut best: Option<BestSplit> = None;
    for feature in candidates {
        if let Some((threshold, impurity)) = best_split_for_feature(values, labels, rows, feature) {
            let improves = match &best {
                Some(b) => impurity < b.impurity,
                None => true,
            };
            if improves {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn grow<R: Rng>(
    values: &[Vec<f64>],
    labels: &[u8],
    rows: Vec<usize>,
    depth: usize,
    max_depth: Option<usize>,
    min_samples_split: usize,
    pick: FeaturePick,
    n_features: usize,
    rng: &mut R,
) -> TreeNode {
    let (class, pure) = majority(labels, &rows);
    let depth_exhausted = max_depth.is_some_and(|d| depth >= d);
    if pure || depth_exhausted || rows.len() < min_samples_split {
        return TreeNode::Leaf { class };
    }
    let Some(split) = find_best_split(values, labels, &rows, n_features, pick, rng) else {
        return TreeNode::Leaf { class };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| values[i][split.feature] <= split.threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
    let left = grow(
        values,
        labels,
        left_rows,
        depth + 1,
        max_depth,
        min_samples_split,
        pick,
        n_features,
        rng,
    );
    let right = grow(
        values,
        labels,
        right_rows,
        depth + 1,
        max_depth,
        min_samples_split,
        pick,
        n_features,
        rng,
    );
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn check_training_inputs(table: &AbundanceTable, labels: &[u8]) -> Result<()> {
    if labels.len() != table.n_samples() {
        return Err(Error::Dimension(format!(
            "{} labels for {} samples",
            labels.len(),
            table.n_samples()
        )));
    }
    if table.n_samples() == 0 {
        return Err(Error::Fit("cannot fit on an empty table".to_string()));
    }
    Ok(())
}

/// Fits a single CART tree over all features. Deterministic.
pub fn fit_cart(table: &AbundanceTable, labels: &[u8], cfg: &TreeConfig) -> Result<CartModel> {
    check_training_inputs(table, labels)?;
    // FeaturePick::All never consumes randomness; the RNG is a formality.
    let mut rng = seed_rng(0);
    let root = grow(
        &table.values,
        labels,
        (0..table.n_samples()).collect(),
        0,
        cfg.max_depth,
        cfg.min_samples_split,
        FeaturePick::All,
        table.n_features(),
        &mut rng,
    );
    Ok(CartModel {
        root,
        n_features: table.n_features(),
    })
}

/// Fits a bagged forest: each tree sees a bootstrap resample (when enabled)
/// and considers ceil(sqrt(F)) features per split (when `Sqrt`).
///
/// Per-tree RNG streams are seeded from the master stream in tree order, so
/// results are identical whether trees are built serially or in parallel.
pub fn fit_forest<R: Rng>(
    table: &AbundanceTable,
    labels: &[u8],
    cfg: &ForestConfig,
    rng: &mut R,
) -> Result<ForestModel> {
    check_training_inputs(table, labels)?;
    if cfg.n_trees == 0 {
        return Err(Error::Config("n_trees must be positive".to_string()));
    }
    let n = table.n_samples();
    let f = table.n_features();
    let pick = match cfg.split_features {
        SplitFeatures::All => FeaturePick::All,
        SplitFeatures::Sqrt => FeaturePick::Random((f as f64).sqrt().ceil() as usize),
    };
    let tree_seeds: Vec<u64> = (0..cfg.n_trees).map(|_| rng.gen()).collect();

    let trees: Vec<TreeNode> = tree_seeds
        .par_iter()
        .map(|&seed| {
            let mut tree_rng = seed_rng(seed);
            let rows: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| tree_rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(
                &table.values,
                labels,
                rows,
                0,
                cfg.max_depth,
                cfg.min_samples_split,
                pick,
                f,
                &mut tree_rng,
            )
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_features: f,
    })
}
