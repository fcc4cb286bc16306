//! Abundance tables: ingestion, normalization, balancing, splits, and
//! synthetic planted-rule generation.
//!
//! Tables hold one sample per row and one feature (taxon) per column, with
//! optional binary labels (0 = healthy, 1 = CRC). All derivation operations
//! are pure and return new tables.

use crate::error::{Error, Result};
use crate::exprtree::{self, ExprNode};
use rand::seq::index;
use rand::Rng;
use std::path::Path;

pub const LABEL_HEALTHY: &str = "healthy";
pub const LABEL_CRC: &str = "CRC";

/// Row sum every sample is scaled to by [`normalize_rows`].
pub const NORMALIZATION_TARGET: f64 = 100.0;

/// A samples-by-features matrix of non-negative relative abundances.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceTable {
    pub feature_names: Vec<String>,
    pub sample_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub labels: Option<Vec<u8>>,
    /// Textual form of the generating rule, for tables produced by
    /// [`synth_planted`].
    pub planted_rule: Option<String>,
}

impl AbundanceTable {
    pub fn new(
        feature_names: Vec<String>,
        sample_ids: Vec<String>,
        values: Vec<Vec<f64>>,
        labels: Option<Vec<u8>>,
    ) -> Result<AbundanceTable> {
        let table = AbundanceTable {
            feature_names,
            sample_ids,
            values,
            labels,
            planted_rule: None,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let n = self.sample_ids.len();
        let f = self.feature_names.len();
        if self.values.len() != n {
            return Err(Error::Dimension(format!(
                "{} sample ids but {} value rows",
                n,
                self.values.len()
            )));
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != f {
                return Err(Error::Data(format!(
                    "row {} has {} values, expected {}",
                    i,
                    row.len(),
                    f
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::Data(format!(
                        "negative or non-finite value {} at row {} (sample `{}`), column `{}`",
                        v, i, self.sample_ids[i], self.feature_names[j]
                    )));
                }
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::Dimension(format!(
                    "{} labels for {} samples",
                    labels.len(),
                    n
                )));
            }
        }
        check_unique(&self.feature_names, "feature name")?;
        check_unique(&self.sample_ids, "sample id")?;
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn labels(&self) -> Result<&[u8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::State("table has no labels".to_string()))
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    /// New table containing the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> AbundanceTable {
        AbundanceTable {
            feature_names: self.feature_names.clone(),
            sample_ids: rows.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            values: rows.iter().map(|&i| self.values[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i]).collect()),
            planted_rule: self.planted_rule.clone(),
        }
    }

    /// Same rows with the labels replaced (e.g. by teacher predictions).
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<AbundanceTable> {
        if labels.len() != self.n_samples() {
            return Err(Error::Dimension(format!(
                "{} labels for {} samples",
                labels.len(),
                self.n_samples()
            )));
        }
        let mut out = self.clone();
        out.labels = Some(labels);
        Ok(out)
    }

    fn class_indices(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let labels = self.labels()?;
        let mut zeros = Vec::new();
        let mut ones = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            if *l == 0 {
                zeros.push(i);
            } else {
                ones.push(i);
            }
        }
        Ok((zeros, ones))
    }
}

fn check_unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for name in names {
        if name.is_empty() {
            return Err(Error::Data(format!("empty {what}")));
        }
        if !seen.insert(name) {
            return Err(Error::Data(format!("duplicate {what} `{name}`")));
        }
    }
    Ok(())
}

// --- CSV I/O -------------------------------------------------------------------

/// Loads a table from CSV: header `sample_id[,label],<feature...>`, one
/// sample per row, labels spelled `healthy` or `CRC`.
pub fn load_table(path: impl AsRef<Path>) -> Result<AbundanceTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Data(format!("cannot open `{}`: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);

    let header = reader
        .headers()
        .map_err(|e| Error::Data(format!("cannot read header of `{}`: {e}", path.display())))?
        .clone();
    if header.is_empty() || header.get(0) != Some("sample_id") {
        return Err(Error::Data(format!(
            "`{}`: first header column must be `sample_id`",
            path.display()
        )));
    }
    let has_label = header.get(1) == Some("label");
    let feature_start = if has_label { 2 } else { 1 };
    let feature_names: Vec<String> = header
        .iter()
        .skip(feature_start)
        .map(str::to_string)
        .collect();

    let mut sample_ids = Vec::new();
    let mut values = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| Error::Data(format!("`{}` row {}: {e}", path.display(), row_idx + 1)))?;
        if record.len() != header.len() {
            return Err(Error::Data(format!(
                "`{}` row {}: {} fields, expected {}",
                path.display(),
                row_idx + 1,
                record.len(),
                header.len()
            )));
        }
        sample_ids.push(record[0].to_string());
        if has_label {
            labels.push(parse_label(&record[1]).ok_or_else(|| {
                Error::Data(format!(
                    "`{}` row {}: unknown label `{}` (expected `{LABEL_HEALTHY}` or `{LABEL_CRC}`)",
                    path.display(),
                    row_idx + 1,
                    &record[1]
                ))
            })?);
        }
        let mut row = Vec::with_capacity(feature_names.len());
        for (col, field) in record.iter().skip(feature_start).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Data(format!(
                    "`{}` row {}, column `{}`: not a number: `{field}`",
                    path.display(),
                    row_idx + 1,
                    feature_names[col]
                ))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Data(format!(
                    "`{}` row {}, column `{}`: negative or non-finite value {v}",
                    path.display(),
                    row_idx + 1,
                    feature_names[col]
                )));
            }
            row.push(v);
        }
        values.push(row);
    }

    AbundanceTable::new(
        feature_names,
        sample_ids,
        values,
        has_label.then_some(labels),
    )
}

fn parse_label(token: &str) -> Option<u8> {
    match token {
        LABEL_HEALTHY => Some(0),
        LABEL_CRC => Some(1),
        _ => None,
    }
}

fn label_text(label: u8) -> &'static str {
    if label == 0 {
        LABEL_HEALTHY
    } else {
        LABEL_CRC
    }
}

/// Writes the table in the same CSV format [`load_table`] reads. Values are
/// printed in shortest round-trip form, so a write/load cycle is lossless.
pub fn save_table(table: &AbundanceTable, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["sample_id".to_string()];
    if table.labels.is_some() {
        header.push("label".to_string());
    }
    header.extend(table.feature_names.iter().cloned());
    writer.write_record(&header)?;
    for (i, row) in table.values.iter().enumerate() {
        let mut record = vec![table.sample_ids[i].clone()];
        if let Some(labels) = &table.labels {
            record.push(label_text(labels[i]).to_string());
        }
        record.extend(row.iter().map(|v| format!("{v}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

// --- Normalization ---------------------------------------------------------------

/// Scales every row to sum to [`NORMALIZATION_TARGET`]. All-zero rows are
/// left untouched and reported in the returned warning list.
pub fn normalize_rows(table: &AbundanceTable) -> (AbundanceTable, Vec<String>) {
    let mut out = table.clone();
    let mut warnings = Vec::new();
    for (i, row) in out.values.iter_mut().enumerate() {
        let sum: f64 = row.iter().sum();
        if sum == 0.0 {
            warnings.push(format!(
                "row {} (sample `{}`) sums to zero; left unnormalized",
                i, out.sample_ids[i]
            ));
            continue;
        }
        let scale = NORMALIZATION_TARGET / sum;
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    (out, warnings)
}

// --- Balancing and splitting --------------------------------------------------------

/// Randomly undersamples the majority class so both classes have equal
/// counts. All minority samples are kept, and surviving rows stay in their
/// original relative order.
pub fn undersample_balance<R: Rng>(table: &AbundanceTable, rng: &mut R) -> Result<AbundanceTable> {
    let (zeros, ones) = table.class_indices()?;
    if zeros.is_empty() || ones.is_empty() {
        return Err(Error::State(
            "undersampling requires both classes to be present".to_string(),
        ));
    }
    let (minority, majority) = if ones.len() <= zeros.len() {
        (ones, zeros)
    } else {
        (zeros, ones)
    };
    let mut keep: Vec<usize> = index::sample(rng, majority.len(), minority.len())
        .into_iter()
        .map(|k| majority[k])
        .collect();
    keep.extend(&minority);
    keep.sort_unstable();
    Ok(table.subset(&keep))
}

/// How to partition a table into train and test sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> SplitSpec {
        SplitSpec {
            test_fraction: 0.25,
            stratified: true,
        }
    }
}

/// Splits into disjoint, exhaustive (train, test) tables.
///
/// Stratified splits apportion the rounded total test count across classes
/// by largest remainder, so class proportions hold as exactly as rounding
/// allows. Row order within each side follows the input order.
pub fn split<R: Rng>(
    table: &AbundanceTable,
    spec: &SplitSpec,
    rng: &mut R,
) -> Result<(AbundanceTable, AbundanceTable)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test_fraction must lie in (0, 1), got {}",
            spec.test_fraction
        )));
    }
    let n = table.n_samples();
    if n < 2 {
        return Err(Error::Config(format!(
            "cannot split a table with {n} samples"
        )));
    }

    let groups: Vec<Vec<usize>> = if spec.stratified {
        let (zeros, ones) = table.class_indices()?;
        [zeros, ones]
            .into_iter()
            .filter(|g| !g.is_empty())
            .collect()
    } else {
        vec![(0..n).collect()]
    };

    let total_test = (spec.test_fraction * n as f64).round() as usize;
    if total_test == 0 || total_test >= n {
        return Err(Error::Config(format!(
            "test_fraction {} leaves one side of the split empty for {n} samples",
            spec.test_fraction
        )));
    }

    // Largest-remainder apportionment of the test quota across classes.
    let mut quotas: Vec<usize> = Vec::with_capacity(groups.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(groups.len());
    for (g, group) in groups.iter().enumerate() {
        let exact = spec.test_fraction * group.len() as f64;
        let floor = exact.floor() as usize;
        quotas.push(floor.min(group.len()));
        remainders.push((g, exact - floor as f64));
    }
    let mut assigned: usize = quotas.iter().sum();
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut r = 0;
    while assigned < total_test && r < remainders.len() {
        let g = remainders[r].0;
        if quotas[g] < groups[g].len() {
            quotas[g] += 1;
            assigned += 1;
        }
        r += 1;
    }

    let mut test_rows = Vec::with_capacity(total_test);
    let mut train_rows = Vec::with_capacity(n - total_test);
    for (group, quota) in groups.iter().zip(&quotas) {
        let chosen: std::collections::HashSet<usize> = index::sample(rng, group.len(), *quota)
            .into_iter()
            .collect();
        for (k, &row) in group.iter().enumerate() {
            if chosen.contains(&k) {
                test_rows.push(row);
            } else {
                train_rows.push(row);
            }
        }
    }
    test_rows.sort_unstable();
    train_rows.sort_unstable();
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::Config(
            "split left one side empty; use a different test_fraction".to_string(),
        ));
    }
    Ok((table.subset(&train_rows), table.subset(&test_rows)))
}

// --- Synthetic planted-rule data ------------------------------------------------------

/// Per-cell probability of a zero in synthetic tables.
pub const SYNTH_SPARSITY: f64 = 0.7;

/// Generates a sparse non-negative table labeled by a known boolean rule.
///
/// Cells are zero with probability [`SYNTH_SPARSITY`] and otherwise uniform
/// in (0, 10]; rows are normalized to sum to 100 before the rule is applied.
/// Each label is then flipped with probability `noise`. The rule's text form
/// is recorded on the returned table.
pub fn synth_planted<R: Rng>(
    n_samples: usize,
    n_features: usize,
    rule: &ExprNode,
    noise: f64,
    rng: &mut R,
) -> Result<AbundanceTable> {
    if !(0.0..0.5).contains(&noise) {
        return Err(Error::Config(format!(
            "label noise must lie in [0, 0.5), got {noise}"
        )));
    }
    if let Some(max_idx) = rule.max_feature_index() {
        if max_idx >= n_features {
            return Err(Error::FeatureOutOfRange {
                index: max_idx,
                n_features,
            });
        }
    }

    let mut values = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut row = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            if rng.gen::<f64>() < SYNTH_SPARSITY {
                row.push(0.0);
            } else {
                // Uniform in (0, 10].
                row.push(10.0 * (1.0 - rng.gen::<f64>()));
            }
        }
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            let scale = NORMALIZATION_TARGET / sum;
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        values.push(row);
    }

    let mut labels = Vec::with_capacity(n_samples);
    for row in &values {
        let score = exprtree::eval_row(rule, row)?;
        let mut label = u8::from(score > 0.5);
        if noise > 0.0 && rng.gen::<f64>() < noise {
            label ^= 1;
        }
        labels.push(label);
    }

    let mut table = AbundanceTable::new(
        (0..n_features).map(|j| format!("F{j}")).collect(),
        (0..n_samples).map(|i| format!("S{i}")).collect(),
        values,
        Some(labels),
    )?;
    table.planted_rule = Some(rule.to_sexpr());
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprtree::Primitive;
    use crate::seed_rng;

    fn toy_table() -> AbundanceTable {
        AbundanceTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["s0".into(), "s1".into()],
            vec![vec![1.0, 1.0, 2.0], vec![0.0, 0.0, 0.0]],
            Some(vec![0, 1]),
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(
            &path,
            "sample_id,label,tax_a,tax_b\ns0,healthy,1.5,0\ns1,CRC,0,2.25\n",
        )
        .unwrap();
        let t = load_table(&path).unwrap();
        assert_eq!(t.n_samples(), 2);
        assert_eq!(t.n_features(), 2);
        assert_eq!(t.labels().unwrap(), &[0, 1]);
        assert_eq!(t.values[0], vec![1.5, 0.0]);

        let out = dir.path().join("out.csv");
        save_table(&t, &out).unwrap();
        let back = load_table(&out).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn save_load_is_lossless_on_awkward_values() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = seed_rng(7);
        let n = 20;
        let f = 5;
        let values: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..f).map(|_| rng.gen::<f64>() * 100.0).collect())
            .collect();
        let t = AbundanceTable::new(
            (0..f).map(|j| format!("F{j}")).collect(),
            (0..n).map(|i| format!("S{i}")).collect(),
            values,
            None,
        )
        .unwrap();
        let path = dir.path().join("x.csv");
        save_table(&t, &path).unwrap();
        let back = load_table(&path).unwrap();
        for (r0, r1) in t.values.iter().zip(&back.values) {
            for (a, b) in r0.iter().zip(r1) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn loader_rejects_bad_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, body).unwrap();
            p
        };

        let p = write("neg.csv", "sample_id,label,a\ns0,healthy,-0.1\n");
        let err = load_table(&p).unwrap_err().to_string();
        assert!(err.contains("row 1") && err.contains("`a`"), "{err}");

        let p = write("dup.csv", "sample_id,label,a,a\ns0,healthy,1,2\n");
        assert!(load_table(&p)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));

        let p = write("label.csv", "sample_id,label,a\ns0,sick,1\n");
        assert!(load_table(&p)
            .unwrap_err()
            .to_string()
            .contains("unknown label"));

        let p = write("ragged.csv", "sample_id,label,a,b\ns0,healthy,1\n");
        assert!(load_table(&p).is_err());

        let err = load_table(dir.path().join("missing.csv")).unwrap_err();
        assert!(err.to_string().contains("missing.csv"));
        assert!(err.is_input_error());
    }

    #[test]
    fn unlabeled_tables_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.csv");
        std::fs::write(&p, "sample_id,a,b\ns0,1,2\n").unwrap();
        let t = load_table(&p).unwrap();
        assert!(t.labels.is_none());
        assert_eq!(t.n_features(), 2);
    }

    #[test]
    fn normalization_scales_proportionally() {
        let (t, warnings) = normalize_rows(&toy_table());
        assert_eq!(t.values[0], vec![25.0, 25.0, 50.0]);
        assert_eq!(t.values[1], vec![0.0, 0.0, 0.0]);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("s1"));
    }

    #[test]
    fn normalization_is_idempotent() {
        let mut rng = seed_rng(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..10);
            let f = rng.gen_range(1..8);
            let values: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..f).map(|_| rng.gen::<f64>() * 10.0).collect())
                .collect();
            let t = AbundanceTable::new(
                (0..f).map(|j| format!("F{j}")).collect(),
                (0..n).map(|i| format!("S{i}")).collect(),
                values,
                None,
            )
            .unwrap();
            let (once, _) = normalize_rows(&t);
            for row in &once.values {
                let sum: f64 = row.iter().sum();
                assert!((sum - 100.0).abs() < 1e-6);
            }
            let (twice, _) = normalize_rows(&once);
            for (r0, r1) in once.values.iter().zip(&twice.values) {
                for (a, b) in r0.iter().zip(r1) {
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                }
            }
        }
    }

    fn labeled_table(n0: usize, n1: usize) -> AbundanceTable {
        let n = n0 + n1;
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n0)).collect();
        AbundanceTable::new(
            vec!["f".into()],
            (0..n).map(|i| format!("S{i}")).collect(),
            (0..n).map(|i| vec![i as f64]).collect(),
            Some(labels),
        )
        .unwrap()
    }

    #[test]
    fn undersampling_balances_classes() {
        let t = labeled_table(10_473, 664);
        let balanced = undersample_balance(&t, &mut seed_rng(1)).unwrap();
        assert_eq!(balanced.n_samples(), 1328);
        let labels = balanced.labels().unwrap();
        let ones: usize = labels.iter().map(|&l| l as usize).sum();
        assert_eq!(ones, 664);
        // Original relative order preserved.
        let mut prev = None;
        for id in &balanced.sample_ids {
            let idx: usize = id[1..].parse().unwrap();
            if let Some(p) = prev {
                assert!(idx > p);
            }
            prev = Some(idx);
        }
    }

    #[test]
    fn undersampling_is_identity_when_balanced() {
        let t = labeled_table(5, 5);
        let balanced = undersample_balance(&t, &mut seed_rng(2)).unwrap();
        assert_eq!(balanced, t);
    }

    #[test]
    fn undersampling_is_deterministic() {
        let t = labeled_table(100, 10);
        let a = undersample_balance(&t, &mut seed_rng(9)).unwrap();
        let b = undersample_balance(&t, &mut seed_rng(9)).unwrap();
        assert_eq!(a.sample_ids, b.sample_ids);
    }

    #[test]
    fn split_counts_match_fraction() {
        let t = labeled_table(4, 4);
        let (train, test) = split(&t, &SplitSpec::default(), &mut seed_rng(4)).unwrap();
        assert_eq!(test.n_samples(), 2);
        assert_eq!(train.n_samples(), 6);
        let test_ones: usize = test.labels().unwrap().iter().map(|&l| l as usize).sum();
        assert_eq!(test_ones, 1);
    }

    #[test]
    fn split_two_samples_half() {
        let t = labeled_table(1, 1);
        let spec = SplitSpec {
            test_fraction: 0.5,
            stratified: true,
        };
        let (train, test) = split(&t, &spec, &mut seed_rng(5)).unwrap();
        assert_eq!(train.n_samples(), 1);
        assert_eq!(test.n_samples(), 1);
    }

    #[test]
    fn split_is_a_partition() {
        let mut rng = seed_rng(6);
        for _ in 0..50 {
            let n0 = rng.gen_range(2..30);
            let n1 = rng.gen_range(2..30);
            let t = labeled_table(n0, n1);
            let (train, test) = split(&t, &SplitSpec::default(), &mut rng).unwrap();
            let mut all: Vec<String> = train
                .sample_ids
                .iter()
                .chain(&test.sample_ids)
                .cloned()
                .collect();
            all.sort();
            let mut expected = t.sample_ids.clone();
            expected.sort();
            assert_eq!(all, expected);
        }
    }

    #[test]
    fn split_rejects_empty_sides() {
        let t = labeled_table(2, 2);
        let spec = SplitSpec {
            test_fraction: 0.05,
            stratified: true,
        };
        assert!(split(&t, &spec, &mut seed_rng(7)).is_err());
    }

    #[test]
    fn planted_labels_follow_rule_without_noise() {
        let rule = ExprNode::Call(Primitive::Presence, vec![ExprNode::Feature(0)]);
        let t = synth_planted(500, 4, &rule, 0.0, &mut seed_rng(8)).unwrap();
        for (row, label) in t.values.iter().zip(t.labels().unwrap()) {
            assert_eq!(*label, u8::from(row[0] > 0.0));
        }
        assert_eq!(t.planted_rule.as_deref(), Some("(presence X0)"));
    }

    #[test]
    fn planted_noise_flips_expected_fraction() {
        let rule = ExprNode::Call(Primitive::Presence, vec![ExprNode::Feature(0)]);
        let t = synth_planted(10_000, 4, &rule, 0.1, &mut seed_rng(9)).unwrap();
        let agree: usize = t
            .values
            .iter()
            .zip(t.labels().unwrap())
            .filter(|(row, &label)| label == u8::from(row[0] > 0.0))
            .count();
        let rate = agree as f64 / 10_000.0;
        assert!((rate - 0.9).abs() < 0.03, "agreement {rate}");
    }

    #[test]
    fn planted_class_balance_tracks_sparsity() {
        let rule = ExprNode::Call(Primitive::Presence, vec![ExprNode::Feature(0)]);
        let t = synth_planted(20_000, 10, &rule, 0.0, &mut seed_rng(10)).unwrap();
        let positives: usize = t.labels().unwrap().iter().map(|&l| l as usize).sum();
        let rate = positives as f64 / 20_000.0;
        // P(cell > 0) = 1 - SYNTH_SPARSITY = 0.3
        assert!((rate - 0.3).abs() < 0.02, "positive rate {rate}");
    }

    #[test]
    fn planted_rejects_out_of_range_rule() {
        let rule = ExprNode::Feature(10);
        assert!(synth_planted(10, 4, &rule, 0.0, &mut seed_rng(11)).is_err());
    }
}
