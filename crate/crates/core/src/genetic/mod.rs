//! The evolutionary search over expression trees.
//!
//! One master RNG stream drives initialization, selection, and variation
//! sequentially; fitness evaluation consumes no randomness and may therefore
//! run in parallel (it uses the ambient rayon pool) without changing any
//! result. Each generation carries its best individual over verbatim, so the
//! best penalized fitness never worsens.

mod config;

pub use config::GPConfig;

use crate::data::AbundanceTable;
use crate::error::{Error, Result};
use crate::exprtree::{self, ExprNode, FunctionSetSpec};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Log-loss probabilities are clipped to `[CLIP, 1 - CLIP]`.
const CLIP: f64 = 1e-15;

/// An expression plus its evaluation bookkeeping.
#[derive(Debug, Clone)]
pub struct Individual {
    pub expr: ExprNode,
    /// Mean log loss on the training table; `None` until evaluated.
    pub raw_fitness: Option<f64>,
    /// `raw_fitness + parsimony_coefficient * size`; `None` until evaluated.
    pub penalized_fitness: Option<f64>,
    pub size: usize,
    pub depth: usize,
}

impl Individual {
    pub fn from_expr(expr: ExprNode) -> Individual {
        let size = expr.size();
        let depth = expr.depth();
        Individual {
            expr,
            raw_fitness: None,
            penalized_fitness: None,
            size,
            depth,
        }
    }

    pub fn is_evaluated(&self) -> bool {
        self.penalized_fitness.is_some()
    }
}

/// Per-generation snapshot of the search.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_raw_fitness: f64,
    pub best_penalized_fitness: f64,
    pub mean_size: f64,
    pub best_expr: String,
}

/// Snapshots for the initial population (generation 0) and every evolved
/// generation after it.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvolutionHistory {
    pub records: Vec<GenerationRecord>,
}

// --- Random tree generation -----------------------------------------------------

/// Probability that a fresh leaf references a feature rather than a constant.
const LEAF_FEATURE_PROB: f64 = 0.9;
/// Probability that the "grow" method places a call at a non-terminal depth.
/// Biased toward calls so initial trees carry enough structure for crossover
/// to work with; the root is always a call when the target depth allows.
const GROW_CALL_PROB: f64 = 0.75;
/// Probability that variation targets an internal node when both kinds exist.
const INTERNAL_NODE_PROB: f64 = 0.9;

fn random_leaf<R: Rng>(
    fs_constants: (f64, f64),
    n_features: usize,
    rng: &mut R,
) -> ExprNode {
    if rng.gen::<f64>() < LEAF_FEATURE_PROB {
        ExprNode::Feature(rng.gen_range(0..n_features))
    } else {
        let (lo, hi) = fs_constants;
        ExprNode::Constant(rng.gen_range(lo..=hi))
    }
}

fn random_tree<R: Rng>(
    function_set: &FunctionSetSpec,
    constant_range: (f64, f64),
    n_features: usize,
    depth_left: usize,
    full: bool,
    root: bool,
    rng: &mut R,
) -> ExprNode {
    let make_call =
        depth_left > 0 && (full || root || rng.gen::<f64>() < GROW_CALL_PROB);
    if !make_call {
        return random_leaf(constant_range, n_features, rng);
    }
    let prims = function_set.primitives();
    let p = prims[rng.gen_range(0..prims.len())];
    let children = (0..p.arity())
        .map(|_| {
            random_tree(
                function_set,
                constant_range,
                n_features,
                depth_left - 1,
                full,
                false,
                rng,
            )
        })
        .collect();
    ExprNode::Call(p, children)
}

/// Draws an init-style tree: target depth uniform in the init range, method
/// "full" or "grow" with equal probability.
fn ramped_tree<R: Rng>(cfg: &GPConfig, n_features: usize, rng: &mut R) -> ExprNode {
    let target = rng.gen_range(cfg.init_depth_min..=cfg.init_depth_max);
    let full = rng.gen::<f64>() < 0.5;
    random_tree(
        &cfg.function_set,
        cfg.constant_range,
        n_features,
        target,
        full,
        true,
        rng,
    )
}

/// Ramped half-and-half initialization of `population_size` trees.
pub fn init_population<R: Rng>(
    cfg: &GPConfig,
    n_features: usize,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    cfg.validate()?;
    if n_features == 0 {
        return Err(Error::Config(
            "population initialization requires at least one feature".to_string(),
        ));
    }
    Ok((0..cfg.population_size)
        .map(|_| Individual::from_expr(ramped_tree(cfg, n_features, rng)))
        .collect())
}

// --- Fitness ------------------------------------------------------------------

/// Mean log loss of the sigmoid-transformed tree output, plus its
/// size-penalized variant.
pub fn fitness(
    expr: &ExprNode,
    table: &AbundanceTable,
    labels: &[u8],
    parsimony: f64,
) -> Result<(f64, f64)> {
    if labels.len() != table.n_samples() {
        return Err(Error::Dimension(format!(
            "{} labels for {} samples",
            labels.len(),
            table.n_samples()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Dimension("fitness over an empty table".to_string()));
    }
    let mut sum = 0.0;
    for (row, &y) in table.values.iter().zip(labels) {
        let p = exprtree::sigmoid(exprtree::eval_row(expr, row)?);
        let p = p.clamp(CLIP, 1.0 - CLIP);
        sum -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    let raw = sum / labels.len() as f64;
    Ok((raw, raw + parsimony * expr.size() as f64))
}

/// Evaluates every individual that does not yet carry fitness values.
/// Pure per-individual work, parallelized over the ambient rayon pool.
pub fn evaluate_population(
    population: &mut [Individual],
    table: &AbundanceTable,
    labels: &[u8],
    parsimony: f64,
) -> Result<()> {
    population
        .par_iter_mut()
        .filter(|ind| !ind.is_evaluated())
        .try_for_each(|ind| {
            let (raw, penalized) = fitness(&ind.expr, table, labels, parsimony)?;
            ind.raw_fitness = Some(raw);
            ind.penalized_fitness = Some(penalized);
            Ok(())
        })
}

/// Strictly better: lower penalized fitness, then smaller size.
fn improves(candidate: &Individual, incumbent: &Individual) -> bool {
    let c = candidate.penalized_fitness.expect("candidate evaluated");
    let i = incumbent.penalized_fitness.expect("incumbent evaluated");
    c < i || (c == i && candidate.size < incumbent.size)
}

fn champion_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for i in 1..population.len() {
        if improves(&population[i], &population[best]) {
            best = i;
        }
    }
    best
}

// --- Selection -----------------------------------------------------------------

/// Tournament selection: samples `k` distinct individuals uniformly and
/// returns the index of the penalized-fitness minimum. Ties break toward
/// smaller size, then smaller index.
pub fn tournament<R: Rng>(population: &[Individual], k: usize, rng: &mut R) -> Result<usize> {
    if k == 0 || k > population.len() {
        return Err(Error::Config(format!(
            "tournament size {k} must lie in [1, {}]",
            population.len()
        )));
    }
    if let Some(unevaluated) = population.iter().position(|ind| !ind.is_evaluated()) {
        return Err(Error::State(format!(
            "tournament over unevaluated population (individual {unevaluated})"
        )));
    }
    let mut entrants: Vec<usize> = index::sample(rng, population.len(), k).into_vec();
    entrants.sort_unstable();
    let mut winner = entrants[0];
    for &i in &entrants[1..] {
        if improves(&population[i], &population[winner]) {
            winner = i;
        }
    }
    Ok(winner)
}

// --- Variation -----------------------------------------------------------------

/// Picks a node for variation: internal nodes with probability 0.9, leaves
/// 0.1, uniform within each class. Returns a preorder index.
fn choose_node_index<R: Rng>(expr: &ExprNode, rng: &mut R) -> usize {
    let mut internals = Vec::new();
    let mut leaves = Vec::new();
    let mut idx = 0usize;
    expr.visit(&mut |node| {
        if node.is_leaf() {
            leaves.push(idx);
        } else {
            internals.push(idx);
        }
        idx += 1;
    });
    let pool = if internals.is_empty() {
        &leaves
    } else if leaves.is_empty() || rng.gen::<f64>() < INTERNAL_NODE_PROB {
        &internals
    } else {
        &leaves
    };
    pool[rng.gen_range(0..pool.len())]
}

/// Subtree crossover with a depth guard: if the offspring would exceed
/// `max_tree_depth`, the parent is returned unchanged.
pub fn crossover<R: Rng>(
    parent: &ExprNode,
    donor: &ExprNode,
    max_tree_depth: usize,
    rng: &mut R,
) -> ExprNode {
    let target = choose_node_index(parent, rng);
    let source = choose_node_index(donor, rng);
    let graft = donor
        .subtree_at(source)
        .expect("chosen index is in preorder range");
    let child = parent.with_replaced(target, graft);
    if child.depth() > max_tree_depth {
        parent.clone()
    } else {
        child
    }
}

/// Crossover against a freshly grown init-style donor.
pub fn subtree_mutation<R: Rng>(
    expr: &ExprNode,
    cfg: &GPConfig,
    n_features: usize,
    rng: &mut R,
) -> ExprNode {
    let donor = ramped_tree(cfg, n_features, rng);
    crossover(expr, &donor, cfg.max_tree_depth, rng)
}

/// Replaces a subtree with one of its own subtrees. Never grows the tree.
pub fn hoist_mutation<R: Rng>(expr: &ExprNode, rng: &mut R) -> ExprNode {
    let outer = choose_node_index(expr, rng);
    let subtree = expr
        .subtree_at(outer)
        .expect("chosen index is in preorder range");
    let inner = choose_node_index(subtree, rng);
    let hoisted = subtree
        .subtree_at(inner)
        .expect("chosen index is in preorder range");
    expr.with_replaced(outer, hoisted)
}

/// Independently rewrites each node with probability `point_replace_prob`:
/// calls swap to a same-arity primitive, leaves are redrawn.
pub fn point_mutation<R: Rng>(
    expr: &ExprNode,
    cfg: &GPConfig,
    n_features: usize,
    rng: &mut R,
) -> ExprNode {
    match expr {
        ExprNode::Call(p, children) => {
            let replace = rng.gen::<f64>() < cfg.point_replace_prob;
            let new_p = if replace {
                let candidates = cfg.function_set.primitives_with_arity(p.arity());
                if candidates.is_empty() {
                    *p
                } else {
                    candidates[rng.gen_range(0..candidates.len())]
                }
            } else {
                *p
            };
            let new_children = children
                .iter()
                .map(|c| point_mutation(c, cfg, n_features, rng))
                .collect();
            ExprNode::Call(new_p, new_children)
        }
        leaf => {
            if rng.gen::<f64>() < cfg.point_replace_prob {
                random_leaf(cfg.constant_range, n_features, rng)
            } else {
                leaf.clone()
            }
        }
    }
}

// --- The generation loop ---------------------------------------------------------

fn generation_record(generation: usize, population: &[Individual]) -> GenerationRecord {
    let champ = &population[champion_index(population)];
    let mean_size =
        population.iter().map(|i| i.size).sum::<usize>() as f64 / population.len() as f64;
    GenerationRecord {
        generation,
        best_raw_fitness: champ.raw_fitness.expect("population evaluated"),
        best_penalized_fitness: champ.penalized_fitness.expect("population evaluated"),
        mean_size,
        best_expr: champ.expr.to_sexpr(),
    }
}

/// Runs the full evolutionary search and returns the best individual ever
/// observed plus per-generation history (generation 0 is the initial
/// population).
pub fn evolve<R: Rng>(
    cfg: &GPConfig,
    table: &AbundanceTable,
    labels: &[u8],
    rng: &mut R,
) -> Result<(Individual, EvolutionHistory)> {
    cfg.validate()?;
    if table.n_samples() == 0 {
        return Err(Error::Dimension("evolve over an empty table".to_string()));
    }
    let n_features = table.n_features();

    let mut population = init_population(cfg, n_features, rng)?;
    evaluate_population(&mut population, table, labels, cfg.parsimony_coefficient)?;

    let mut history = EvolutionHistory::default();
    history.records.push(generation_record(0, &population));
    let mut best = population[champion_index(&population)].clone();

    for generation in 1..=cfg.generations {
        population = next_generation(cfg, &population, n_features, rng)?;
        evaluate_population(&mut population, table, labels, cfg.parsimony_coefficient)?;
        let champ = &population[champion_index(&population)];
        if improves(champ, &best) {
            best = champ.clone();
        }
        history.records.push(generation_record(generation, &population));
    }
    Ok((best, history))
}

/// Builds the next generation: the elite goes through verbatim (displacing
/// one child slot) and the rest are produced by tournament selection plus
/// the configured variation mix.
fn next_generation<R: Rng>(
    cfg: &GPConfig,
    population: &[Individual],
    n_features: usize,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let elite = population[champion_index(population)].clone();
    let mut next = Vec::with_capacity(population.len());
    next.push(elite);

    let cx = cfg.crossover_prob;
    let sub = cx + cfg.subtree_mutation_prob;
    let hoist = sub + cfg.hoist_mutation_prob;
    let point = hoist + cfg.point_mutation_prob;

    while next.len() < population.len() {
        let parent_idx = tournament(population, cfg.tournament_size, rng)?;
        let parent = &population[parent_idx];
        let r = rng.gen::<f64>();
        let child = if r < cx {
            let donor_idx = tournament(population, cfg.tournament_size, rng)?;
            Individual::from_expr(crossover(
                &parent.expr,
                &population[donor_idx].expr,
                cfg.max_tree_depth,
                rng,
            ))
        } else if r < sub {
            Individual::from_expr(subtree_mutation(&parent.expr, cfg, n_features, rng))
        } else if r < hoist {
            Individual::from_expr(hoist_mutation(&parent.expr, rng))
        } else if r < point {
            Individual::from_expr(point_mutation(&parent.expr, cfg, n_features, rng))
        } else {
            // Reproduction: the copy keeps its parent's fitness.
            parent.clone()
        };
        next.push(child);
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{self, SplitSpec};
    use crate::exprtree::{predict_label_rows, Primitive};
    use crate::seed_rng;

    fn small_cfg() -> GPConfig {
        GPConfig {
            population_size: 60,
            generations: 4,
            tournament_size: 5,
            ..GPConfig::default()
        }
    }

    fn planted_presence_table(seed: u64) -> data::AbundanceTable {
        let rule = ExprNode::Call(Primitive::Presence, vec![ExprNode::Feature(3)]);
        data::synth_planted(300, 8, &rule, 0.0, &mut seed_rng(seed)).unwrap()
    }

    #[test]
    fn zero_init_depth_yields_leaves() {
        let cfg = GPConfig {
            init_depth_min: 0,
            init_depth_max: 0,
            population_size: 50,
            tournament_size: 5,
            ..GPConfig::default()
        };
        let pop = init_population(&cfg, 4, &mut seed_rng(0)).unwrap();
        assert!(pop.iter().all(|ind| ind.size == 1 && ind.depth == 0));
        assert!(pop.iter().all(|ind| !ind.is_evaluated()));
    }

    #[test]
    fn init_respects_depth_bounds() {
        let cfg = GPConfig::default();
        let pop = init_population(&cfg, 20, &mut seed_rng(1)).unwrap();
        assert_eq!(pop.len(), 6000);
        assert!(pop.iter().all(|ind| ind.depth <= cfg.init_depth_max));
        // Ramping reaches the top of the range.
        assert!(pop.iter().any(|ind| ind.depth == cfg.init_depth_max));
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = small_cfg();
        let a: Vec<String> = init_population(&cfg, 6, &mut seed_rng(42))
            .unwrap()
            .iter()
            .map(|i| i.expr.to_sexpr())
            .collect();
        let b: Vec<String> = init_population(&cfg, 6, &mut seed_rng(42))
            .unwrap()
            .iter()
            .map(|i| i.expr.to_sexpr())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_zero_fitness_is_ln_two() {
        let t = planted_presence_table(0);
        let labels = t.labels().unwrap().to_vec();
        let (raw, penalized) = fitness(&ExprNode::Constant(0.0), &t, &labels, 0.0).unwrap();
        assert!((raw - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(raw, penalized);
    }

    #[test]
    fn parsimony_penalty_is_linear_in_size() {
        let t = planted_presence_table(1);
        let labels = t.labels().unwrap().to_vec();
        let expr = crate::exprtree::parse_sexpr(
            "(ifelse (mul (presence X3) (sub X3 0.5)) (add (absence_both X1 X2) (div X1 (sqrt X4))))",
        )
        .unwrap();
        assert_eq!(expr.size(), 15);
        let (raw, penalized) = fitness(&expr, &t, &labels, 0.001).unwrap();
        assert!((penalized - raw - 0.015).abs() < 1e-15);
    }

    #[test]
    fn perfect_separator_has_negligible_loss() {
        // Scores are +/-50 depending on the label.
        let t = data::AbundanceTable::new(
            vec!["f".into()],
            (0..6).map(|i| format!("S{i}")).collect(),
            vec![
                vec![100.0],
                vec![0.0],
                vec![100.0],
                vec![0.0],
                vec![100.0],
                vec![0.0],
            ],
            Some(vec![1, 0, 1, 0, 1, 0]),
        )
        .unwrap();
        let labels = t.labels().unwrap().to_vec();
        let expr = ExprNode::Call(
            Primitive::Sub,
            vec![ExprNode::Feature(0), ExprNode::Constant(50.0)],
        );
        let (raw, _) = fitness(&expr, &t, &labels, 0.0).unwrap();
        assert!(raw < 1e-6, "raw loss {raw}");
    }

    fn evaluated_pop(fitness_and_size: &[(f64, usize)]) -> Vec<Individual> {
        fitness_and_size
            .iter()
            .map(|&(f, size)| {
                // Build a chain of neg() calls to reach the requested size.
                let mut expr = ExprNode::Constant(1.0);
                for _ in 1..size {
                    expr = ExprNode::Call(Primitive::Neg, vec![expr]);
                }
                let mut ind = Individual::from_expr(expr);
                ind.raw_fitness = Some(f);
                ind.penalized_fitness = Some(f);
                ind
            })
            .collect()
    }

    #[test]
    fn exhaustive_tournament_returns_global_argmin() {
        let pop = evaluated_pop(&[(0.9, 1), (0.2, 3), (0.5, 2), (0.2, 7)]);
        let winner = tournament(&pop, pop.len(), &mut seed_rng(3)).unwrap();
        assert_eq!(winner, 1); // fitness tie with index 3 broken by size
    }

    #[test]
    fn single_entrant_tournament_is_uniform() {
        let pop = evaluated_pop(&[(0.1, 1), (0.2, 1), (0.3, 1), (0.4, 1)]);
        let mut rng = seed_rng(4);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            seen.insert(tournament(&pop, 1, &mut rng).unwrap());
        }
        assert_eq!(seen.len(), pop.len());
    }

    #[test]
    fn tournament_tie_breaks_toward_smaller_size() {
        let pop = evaluated_pop(&[(0.5, 7), (0.5, 3)]);
        let winner = tournament(&pop, 2, &mut seed_rng(5)).unwrap();
        assert_eq!(winner, 1);
    }

    #[test]
    fn tournament_requires_evaluated_population() {
        let pop = vec![Individual::from_expr(ExprNode::Constant(0.0))];
        assert!(matches!(
            tournament(&pop, 1, &mut seed_rng(6)),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn crossover_on_leaf_parent_takes_donor_subtree() {
        let parent = ExprNode::Constant(1.0);
        let donor = ExprNode::Call(
            Primitive::Presence,
            vec![ExprNode::Feature(0)],
        );
        let mut rng = seed_rng(7);
        for _ in 0..20 {
            let child = crossover(&parent, &donor, 17, &mut rng);
            // Every possible donor subtree appears inside the donor itself.
            let mut found = false;
            donor.visit(&mut |n| {
                if *n == child {
                    found = true;
                }
            });
            assert!(found, "child {child:?} is not a donor subtree");
        }
    }

    #[test]
    fn crossover_respects_depth_cap() {
        let cfg = GPConfig::default();
        let mut rng = seed_rng(8);
        for _ in 0..10_000 {
            let a = ramped_tree(&cfg, 5, &mut rng);
            let b = ramped_tree(&cfg, 5, &mut rng);
            let child = crossover(&a, &b, 8, &mut rng);
            assert!(child.depth() <= 8);
        }
    }

    #[test]
    fn crossover_is_deterministic() {
        let cfg = GPConfig::default();
        let a = ramped_tree(&cfg, 5, &mut seed_rng(9));
        let b = ramped_tree(&cfg, 5, &mut seed_rng(10));
        let c1 = crossover(&a, &b, 17, &mut seed_rng(11));
        let c2 = crossover(&a, &b, 17, &mut seed_rng(11));
        assert_eq!(c1, c2);
    }

    #[test]
    fn hoist_on_leaf_is_identity() {
        let leaf = ExprNode::Feature(2);
        assert_eq!(hoist_mutation(&leaf, &mut seed_rng(12)), leaf);
    }

    #[test]
    fn hoist_never_grows() {
        let cfg = GPConfig::default();
        let mut rng = seed_rng(13);
        for _ in 0..10_000 {
            let t = ramped_tree(&cfg, 5, &mut rng);
            let hoisted = hoist_mutation(&t, &mut rng);
            assert!(hoisted.size() <= t.size());
        }
    }

    #[test]
    fn point_mutation_with_zero_prob_is_identity() {
        let cfg = GPConfig {
            point_replace_prob: 0.0,
            ..GPConfig::default()
        };
        let mut rng = seed_rng(14);
        for _ in 0..100 {
            let t = ramped_tree(&cfg, 5, &mut rng);
            assert_eq!(point_mutation(&t, &cfg, 5, &mut rng), t);
        }
    }

    #[test]
    fn point_mutation_preserves_shape() {
        let cfg = GPConfig {
            point_replace_prob: 1.0,
            ..GPConfig::default()
        };
        let mut rng = seed_rng(15);
        for _ in 0..200 {
            let t = ramped_tree(&cfg, 5, &mut rng);
            let m = point_mutation(&t, &cfg, 5, &mut rng);
            assert_eq!(m.size(), t.size());
            assert_eq!(m.depth(), t.depth());
        }
    }

    #[test]
    fn zero_generations_returns_best_of_init() {
        let t = planted_presence_table(2);
        let labels = t.labels().unwrap().to_vec();
        let cfg = GPConfig {
            generations: 0,
            ..small_cfg()
        };
        let (best, history) = evolve(&cfg, &t, &labels, &mut seed_rng(16)).unwrap();
        assert_eq!(history.records.len(), 1);
        assert_eq!(history.records[0].best_expr, best.expr.to_sexpr());

        // The champion matches an independent re-derivation of the initial population.
        let mut pop = init_population(&cfg, t.n_features(), &mut seed_rng(16)).unwrap();
        evaluate_population(&mut pop, &t, &labels, cfg.parsimony_coefficient).unwrap();
        let champ = &pop[champion_index(&pop)];
        assert_eq!(champ.expr.to_sexpr(), best.expr.to_sexpr());
    }

    #[test]
    fn evolve_is_deterministic() {
        let t = planted_presence_table(3);
        let labels = t.labels().unwrap().to_vec();
        let cfg = small_cfg();
        let (best_a, hist_a) = evolve(&cfg, &t, &labels, &mut seed_rng(17)).unwrap();
        let (best_b, hist_b) = evolve(&cfg, &t, &labels, &mut seed_rng(17)).unwrap();
        assert_eq!(best_a.expr.to_sexpr(), best_b.expr.to_sexpr());
        let render = |h: &EvolutionHistory| serde_json::to_string(&h.records).unwrap();
        assert_eq!(render(&hist_a), render(&hist_b));
    }

    #[test]
    fn elitism_makes_best_penalized_monotone() {
        let t = planted_presence_table(4);
        let labels = t.labels().unwrap().to_vec();
        let cfg = GPConfig {
            generations: 8,
            ..small_cfg()
        };
        let (best, history) = evolve(&cfg, &t, &labels, &mut seed_rng(18)).unwrap();
        let fits: Vec<f64> = history
            .records
            .iter()
            .map(|r| r.best_penalized_fitness)
            .collect();
        for pair in fits.windows(2) {
            assert!(pair[1] <= pair[0], "best penalized worsened: {fits:?}");
        }
        assert_eq!(best.penalized_fitness.unwrap(), *fits.last().unwrap());
        assert!(best.depth <= cfg.max_tree_depth);
        // The penalty is definitional: penalized is raw plus the size term.
        assert_eq!(
            best.penalized_fitness.unwrap(),
            best.raw_fitness.unwrap() + cfg.parsimony_coefficient * best.size as f64
        );
    }

    #[test]
    fn pure_copy_schedule_never_worsens_elite_raw_fitness() {
        let t = planted_presence_table(5);
        let labels = t.labels().unwrap().to_vec();
        let cfg = GPConfig {
            crossover_prob: 0.0,
            subtree_mutation_prob: 0.0,
            hoist_mutation_prob: 0.0,
            point_mutation_prob: 0.0,
            parsimony_coefficient: 0.0,
            generations: 6,
            ..small_cfg()
        };
        let (_, history) = evolve(&cfg, &t, &labels, &mut seed_rng(19)).unwrap();
        let raws: Vec<f64> = history.records.iter().map(|r| r.best_raw_fitness).collect();
        for pair in raws.windows(2) {
            assert!(pair[1] <= pair[0], "elite raw fitness worsened: {raws:?}");
        }
    }

    #[test]
    fn recovers_planted_presence_rule() {
        let cfg = GPConfig {
            population_size: 400,
            generations: 10,
            ..GPConfig::default()
        };
        let mut wins = 0;
        for seed in 0..10u64 {
            let table = planted_presence_table(100 + seed);
            let balanced = data::undersample_balance(&table, &mut seed_rng(200 + seed)).unwrap();
            let (train, test) =
                data::split(&balanced, &SplitSpec::default(), &mut seed_rng(300 + seed)).unwrap();
            let train_labels = train.labels().unwrap().to_vec();
            let (best, _) = evolve(&cfg, &train, &train_labels, &mut seed_rng(400 + seed)).unwrap();
            let pred = predict_label_rows(&best.expr, &test.values, 0.5).unwrap();
            let hits = pred
                .iter()
                .zip(test.labels().unwrap())
                .filter(|(p, t)| p == t)
                .count();
            let acc = hits as f64 / pred.len() as f64;
            if acc >= 0.99 {
                wins += 1;
            }
        }
        assert!(wins >= 9, "only {wins}/10 seeds recovered the rule");
    }
}
