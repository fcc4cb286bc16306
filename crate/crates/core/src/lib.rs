//! Symbolic classification of compositional abundance tables.
//!
//! The engine evolves expression trees over relative-abundance features with
//! a function set that includes presence/absence indicators tailored to
//! sparse compositional data. Alongside the evolutionary search it ships the
//! reference classifiers (logistic regression, CART, random forest) used to
//! benchmark it, utilities for balanced subsampling and synthetic
//! planted-rule data, and post-hoc analysis: feature-frequency ranking,
//! expression-length statistics, and knowledge distillation of a black-box
//! teacher into a single readable expression.

pub mod analysis;
pub mod baselines;
pub mod data;
pub mod error;
pub mod exprtree;
pub mod genetic;

pub use error::{Error, Result};
pub use exprtree::{ExprNode, FunctionSetSpec, Primitive};

use rand_chacha::ChaCha8Rng;

/// Creates the reproducible RNG used throughout the engine.
pub fn seed_rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
