//! Post-hoc interpretation of learned expressions.
//!
//! Feature-frequency ranking across an expression corpus, expression-length
//! statistics, per-class abundance summaries, and knowledge distillation of
//! an opaque teacher into a single expression with a held-out fidelity
//! score.

use crate::data::{self, AbundanceTable, SplitSpec};
use crate::error::{Error, Result};
use crate::exprtree::{self, ExprNode};
use crate::genetic::{evolve, GPConfig, Individual};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

// --- Feature counts ---------------------------------------------------------------

/// How feature occurrences are tallied across a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Every `Feature` node counts; a feature used twice in one expression
    /// contributes 2.
    Occurrences,
    /// Each expression contributes at most 1 per feature.
    PerExpression,
}

/// Features ordered by how often they appear, descending; ties break
/// lexicographically by name. Features that never appear are omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureCountRanking {
    pub entries: Vec<(String, usize)>,
    pub mode: CountMode,
}

impl FeatureCountRanking {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, c)| c).sum()
    }
}

/// Tallies feature occurrences across all expressions (multiplicity counts).
pub fn feature_counts(exprs: &[ExprNode], feature_names: &[String]) -> Result<FeatureCountRanking> {
    feature_counts_with_mode(exprs, feature_names, CountMode::Occurrences)
}

pub fn feature_counts_with_mode(
    exprs: &[ExprNode],
    feature_names: &[String],
    mode: CountMode,
) -> Result<FeatureCountRanking> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for expr in exprs {
        let mut local: BTreeMap<usize, usize> = BTreeMap::new();
        let mut out_of_range = None;
        expr.visit(&mut |node| {
            if let ExprNode::Feature(i) = node {
                if *i >= feature_names.len() {
                    out_of_range.get_or_insert(*i);
                } else {
                    *local.entry(*i).or_default() += 1;
                }
            }
        });
        if let Some(index) = out_of_range {
            return Err(Error::MissingFeatureName { index });
        }
        for (i, c) in local {
            let add = match mode {
                CountMode::Occurrences => c,
                CountMode::PerExpression => 1,
            };
            *counts.entry(i).or_default() += add;
        }
    }
    let mut entries: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(i, c)| (feature_names[i].clone(), c))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(FeatureCountRanking { entries, mode })
}

// --- Length statistics ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthStats {
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub sizes: Vec<usize>,
}

/// Mean and population standard deviation of expression sizes (node counts).
pub fn length_stats(exprs: &[ExprNode]) -> Result<LengthStats> {
    if exprs.is_empty() {
        return Err(Error::Dimension(
            "length statistics over an empty expression list".to_string(),
        ));
    }
    let sizes: Vec<usize> = exprs.iter().map(ExprNode::size).collect();
    let n = sizes.len() as f64;
    let mean = sizes.iter().sum::<usize>() as f64 / n;
    let var = sizes
        .iter()
        .map(|&s| (s as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok(LengthStats {
        mean,
        stddev: var.sqrt(),
        sizes,
    })
}

// --- Per-class feature summaries ----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureClassSummary {
    pub feature: String,
    /// `healthy` or `CRC`.
    pub class: String,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

/// Per-feature, per-class mean and population standard deviation of
/// abundance. Rows come out feature-major, class 0 before class 1.
pub fn feature_summary(
    table: &AbundanceTable,
    features: &[String],
) -> Result<Vec<FeatureClassSummary>> {
    let labels = table.labels()?;
    let mut out = Vec::with_capacity(features.len() * 2);
    for name in features {
        let j = table.feature_index(name)?;
        for class in [0u8, 1u8] {
            let column: Vec<f64> = table
                .values
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == class)
                .map(|(row, _)| row[j])
                .collect();
            let (mean, stddev) = if column.is_empty() {
                (0.0, 0.0)
            } else {
                let n = column.len() as f64;
                let mean = column.iter().sum::<f64>() / n;
                let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt())
            };
            out.push(FeatureClassSummary {
                feature: name.clone(),
                class: if class == 0 {
                    data::LABEL_HEALTHY.to_string()
                } else {
                    data::LABEL_CRC.to_string()
                },
                mean,
                stddev,
            });
        }
    }
    Ok(out)
}

// --- Distillation ---------------------------------------------------------------

/// Fraction of the table reserved for fidelity measurement during
/// distillation.
pub const DISTILL_HOLDOUT_FRACTION: f64 = 0.25;

/// A student expression fitted to teacher labels, with its agreement on
/// rows the search never saw.
#[derive(Debug, Clone)]
pub struct DistillationResult {
    pub student: Individual,
    /// Fraction of held-out rows where the student matches the teacher.
    pub fidelity: f64,
    pub teacher_source: String,
    pub config_echo: GPConfig,
}

/// Fraction of rows where the student's label equals the teacher's.
pub fn fidelity(student: &ExprNode, teacher_labels: &[u8], table: &AbundanceTable) -> Result<f64> {
    if teacher_labels.len() != table.n_samples() {
        return Err(Error::Dimension(format!(
            "{} teacher labels for {} samples",
            teacher_labels.len(),
            table.n_samples()
        )));
    }
    if teacher_labels.is_empty() {
        return Err(Error::Dimension("fidelity over zero samples".to_string()));
    }
    let pred = exprtree::predict_label_rows(student, &table.values, 0.5)?;
    let agree = pred
        .iter()
        .zip(teacher_labels)
        .filter(|(p, t)| p == t)
        .count();
    Ok(agree as f64 / teacher_labels.len() as f64)
}

/// Evolves a student against the teacher's labels on three quarters of the
/// rows (stratified by teacher label) and reports fidelity on the held-out
/// quarter.
pub fn distill<R: Rng>(
    table: &AbundanceTable,
    teacher_labels: &[u8],
    cfg: &GPConfig,
    teacher_source: &str,
    rng: &mut R,
) -> Result<DistillationResult> {
    if teacher_labels.len() != table.n_samples() {
        return Err(Error::Dimension(format!(
            "{} teacher labels for {} samples",
            teacher_labels.len(),
            table.n_samples()
        )));
    }
    let relabeled = table.with_labels(teacher_labels.to_vec())?;
    let spec = SplitSpec {
        test_fraction: DISTILL_HOLDOUT_FRACTION,
        stratified: true,
    };
    let (train, held_out) = data::split(&relabeled, &spec, rng)?;
    let train_labels = train.labels()?.to_vec();
    let (student, _history) = evolve(cfg, &train, &train_labels, rng)?;
    let fidelity = fidelity(&student.expr, held_out.labels()?, &held_out)?;
    Ok(DistillationResult {
        student,
        fidelity,
        teacher_source: teacher_source.to_string(),
        config_echo: cfg.clone(),
    })
}

/// Re-derives the train/held-out partition `distill` uses for a given RNG
/// stream, without running the search. Lets callers verify the fidelity
/// figure against rows the search never observed.
pub fn distill_holdout_split<R: Rng>(
    table: &AbundanceTable,
    teacher_labels: &[u8],
    rng: &mut R,
) -> Result<(AbundanceTable, AbundanceTable)> {
    let relabeled = table.with_labels(teacher_labels.to_vec())?;
    let spec = SplitSpec {
        test_fraction: DISTILL_HOLDOUT_FRACTION,
        stratified: true,
    };
    data::split(&relabeled, &spec, rng)
}
