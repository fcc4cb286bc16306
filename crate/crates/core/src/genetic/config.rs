//! Evolutionary hyperparameters.

use crate::error::{Error, Result};
use crate::exprtree::FunctionSetSpec;
use serde::Serialize;
use std::path::Path;

/// All knobs of the evolutionary search.
///
/// The variation probabilities partition the unit interval: whatever mass is
/// left after crossover and the three mutations is plain reproduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GPConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub init_depth_min: usize,
    pub init_depth_max: usize,
    pub parsimony_coefficient: f64,
    pub crossover_prob: f64,
    pub subtree_mutation_prob: f64,
    pub hoist_mutation_prob: f64,
    pub point_mutation_prob: f64,
    pub point_replace_prob: f64,
    pub constant_range: (f64, f64),
    pub function_set: FunctionSetSpec,
    pub max_tree_depth: usize,
    pub seed: u64,
}

impl Default for GPConfig {
    fn default() -> GPConfig {
        GPConfig {
            population_size: 6000,
            generations: 20,
            tournament_size: 25,
            init_depth_min: 2,
            init_depth_max: 6,
            parsimony_coefficient: 0.001,
            crossover_prob: 0.9,
            subtree_mutation_prob: 0.01,
            hoist_mutation_prob: 0.01,
            point_mutation_prob: 0.01,
            point_replace_prob: 0.05,
            constant_range: (-1.0, 1.0),
            function_set: FunctionSetSpec::srf(),
            max_tree_depth: 17,
            seed: 0,
        }
    }
}

impl GPConfig {
    pub fn validate(&self) -> Result<()> {
        let mut fail = |msg: String| Err(Error::Config(msg));
        if self.population_size < 2 {
            return fail(format!(
                "population_size must be at least 2, got {}",
                self.population_size
            ));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return fail(format!(
                "tournament_size must lie in [1, population_size], got {}",
                self.tournament_size
            ));
        }
        if self.init_depth_min > self.init_depth_max {
            return fail(format!(
                "init_depth_min {} exceeds init_depth_max {}",
                self.init_depth_min, self.init_depth_max
            ));
        }
        if self.init_depth_max > self.max_tree_depth {
            return fail(format!(
                "init_depth_max {} exceeds max_tree_depth {}",
                self.init_depth_max, self.max_tree_depth
            ));
        }
        let probs = [
            ("crossover_prob", self.crossover_prob),
            ("subtree_mutation_prob", self.subtree_mutation_prob),
            ("hoist_mutation_prob", self.hoist_mutation_prob),
            ("point_mutation_prob", self.point_mutation_prob),
            ("point_replace_prob", self.point_replace_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        let total = self.crossover_prob
            + self.subtree_mutation_prob
            + self.hoist_mutation_prob
            + self.point_mutation_prob;
        if total > 1.0 + 1e-12 {
            return fail(format!(
                "crossover and mutation probabilities sum to {total}, which exceeds 1"
            ));
        }
        if self.parsimony_coefficient < 0.0 {
            return fail(format!(
                "parsimony_coefficient must be non-negative, got {}",
                self.parsimony_coefficient
            ));
        }
        let (lo, hi) = self.constant_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return fail(format!("constant_range [{lo}, {hi}] is not a valid interval"));
        }
        if self.function_set.is_empty() {
            return fail("function_set must enable at least one primitive".to_string());
        }
        Ok(())
    }

    /// Loads a flat `key = value` configuration file. Keys are exactly the
    /// field names; `#` starts a comment; unknown keys are errors.
    pub fn from_file(path: impl AsRef<Path>) -> Result<GPConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
        let mut cfg = GPConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "`{}` line {}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            cfg.set_field(key.trim(), value.trim()).map_err(|e| {
                Error::Config(format!("`{}` line {}: {e}", path.display(), lineno + 1))
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its textual form; used by the file loader and by
    /// CLI overrides.
    pub fn set_field(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
        }
        match key {
            "population_size" => self.population_size = num(key, value)?,
            "generations" => self.generations = num(key, value)?,
            "tournament_size" => self.tournament_size = num(key, value)?,
            "init_depth_min" => self.init_depth_min = num(key, value)?,
            "init_depth_max" => self.init_depth_max = num(key, value)?,
            "parsimony_coefficient" => self.parsimony_coefficient = num(key, value)?,
            "crossover_prob" => self.crossover_prob = num(key, value)?,
            "subtree_mutation_prob" => self.subtree_mutation_prob = num(key, value)?,
            "hoist_mutation_prob" => self.hoist_mutation_prob = num(key, value)?,
            "point_mutation_prob" => self.point_mutation_prob = num(key, value)?,
            "point_replace_prob" => self.point_replace_prob = num(key, value)?,
            "constant_range" => {
                let (lo, hi) = value.split_once(',').ok_or_else(|| {
                    Error::Config(format!(
                        "constant_range expects `low,high`, got `{value}`"
                    ))
                })?;
                self.constant_range = (num(key, lo.trim())?, num(key, hi.trim())?);
            }
            "function_set" => self.function_set = FunctionSetSpec::from_preset(value)?,
            "max_tree_depth" => self.max_tree_depth = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}
