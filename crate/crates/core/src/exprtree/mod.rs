//! Expression trees over abundance features.
//!
//! The function set mixes conventional protected arithmetic with
//! presence/absence indicators designed for sparse compositional data:
//! `presence(x)` is 1 when a feature is observed at all, `presence_both`
//! requires two features together, and `ifelse(a, b)` keeps whichever of two
//! abundances is larger. Trees evaluate row-by-row and classify through a
//! sigmoid transform.

mod dot;
mod sexpr;

pub use dot::to_dot;
pub use sexpr::parse_sexpr;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Scores below this magnitude are treated as zero by the protected
/// division and logarithm, matching the conventional GP guard value.
pub const PROTECTED_EPS: f64 = 1e-3;

// --- Primitives --------------------------------------------------------------

/// A function-set member. Arities are fixed: see [`Primitive::arity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Add,
    Sub,
    Mul,
    Div,
    Log,
    Sqrt,
    Abs,
    Neg,
    Presence,
    Absence,
    PresenceBoth,
    AbsenceBoth,
    IfElse,
    Min,
    Max,
}

impl Primitive {
    /// Every primitive, in canonical order.
    pub const ALL: [Primitive; 15] = [
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mul,
        Primitive::Div,
        Primitive::Log,
        Primitive::Sqrt,
        Primitive::Abs,
        Primitive::Neg,
        Primitive::Presence,
        Primitive::Absence,
        Primitive::PresenceBoth,
        Primitive::AbsenceBoth,
        Primitive::IfElse,
        Primitive::Min,
        Primitive::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Add => "add",
            Primitive::Sub => "sub",
            Primitive::Mul => "mul",
            Primitive::Div => "div",
            Primitive::Log => "log",
            Primitive::Sqrt => "sqrt",
            Primitive::Abs => "abs",
            Primitive::Neg => "neg",
            Primitive::Presence => "presence",
            Primitive::Absence => "absence",
            Primitive::PresenceBoth => "presence_both",
            Primitive::AbsenceBoth => "absence_both",
            Primitive::IfElse => "ifelse",
            Primitive::Min => "min",
            Primitive::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Primitive::Log
            | Primitive::Sqrt
            | Primitive::Abs
            | Primitive::Neg
            | Primitive::Presence
            | Primitive::Absence => 1,
            Primitive::Add
            | Primitive::Sub
            | Primitive::Mul
            | Primitive::Div
            | Primitive::PresenceBoth
            | Primitive::AbsenceBoth
            | Primitive::IfElse
            | Primitive::Min
            | Primitive::Max => 2,
        }
    }

    pub fn from_name(name: &str) -> Option<Primitive> {
        Primitive::ALL.iter().copied().find(|p| p.name() == name)
    }
}

/// Applies one primitive to already-evaluated arguments.
///
/// Division and logarithm are protected (they fall back to 1.0 and 0.0 when
/// the operand is within [`PROTECTED_EPS`] of zero), `sqrt` takes the absolute
/// value first, and the indicator primitives return exactly 0.0 or 1.0.
pub fn apply_primitive(p: Primitive, args: &[f64]) -> Result<f64> {
    if args.len() != p.arity() {
        return Err(Error::ArityMismatch {
            name: p.name(),
            expected: p.arity(),
            got: args.len(),
        });
    }
    if args.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFiniteInput { name: p.name() });
    }
    let out = match p {
        Primitive::Add => args[0] + args[1],
        Primitive::Sub => args[0] - args[1],
        Primitive::Mul => args[0] * args[1],
        Primitive::Div => {
            if args[1].abs() < PROTECTED_EPS {
                1.0
            } else {
                args[0] / args[1]
            }
        }
        Primitive::Log => {
            if args[0].abs() < PROTECTED_EPS {
                0.0
            } else {
                args[0].abs().ln()
            }
        }
        Primitive::Sqrt => args[0].abs().sqrt(),
        Primitive::Abs => args[0].abs(),
        Primitive::Neg => -args[0],
        Primitive::Presence => {
            if args[0] > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Primitive::Absence => {
            if args[0] > 0.0 {
                0.0
            } else {
                1.0
            }
        }
        Primitive::PresenceBoth => {
            if args[0] > 0.0 && args[1] > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Primitive::AbsenceBoth => {
            if args[0] <= 0.0 && args[1] <= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Primitive::IfElse => {
            if args[0] > args[1] {
                args[0]
            } else {
                args[1]
            }
        }
        Primitive::Min => args[0].min(args[1]),
        Primitive::Max => args[0].max(args[1]),
    };
    if !out.is_finite() {
        return Err(Error::NonFiniteResult { name: p.name() });
    }
    Ok(out)
}

// --- Expression nodes ---------------------------------------------------------

/// A node in an expression tree: a constant, a feature reference, or a
/// primitive call with exactly `arity` children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExprNode {
    Constant(f64),
    Feature(usize),
    Call(Primitive, Vec<ExprNode>),
}

impl ExprNode {
    /// Convenience constructor that checks the child count.
    pub fn call(p: Primitive, children: Vec<ExprNode>) -> Result<ExprNode> {
        if children.len() != p.arity() {
            return Err(Error::ArityMismatch {
                name: p.name(),
                expected: p.arity(),
                got: children.len(),
            });
        }
        Ok(ExprNode::Call(p, children))
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        match self {
            ExprNode::Constant(_) | ExprNode::Feature(_) => 1,
            ExprNode::Call(_, children) => 1 + children.iter().map(ExprNode::size).sum::<usize>(),
        }
    }

    /// Longest root-to-leaf edge count; a single node has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            ExprNode::Constant(_) | ExprNode::Feature(_) => 0,
            ExprNode::Call(_, children) => {
                1 + children.iter().map(ExprNode::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, ExprNode::Call(..))
    }

    /// Largest feature index referenced, if any.
    pub fn max_feature_index(&self) -> Option<usize> {
        match self {
            ExprNode::Constant(_) => None,
            ExprNode::Feature(i) => Some(*i),
            ExprNode::Call(_, children) => {
                children.iter().filter_map(ExprNode::max_feature_index).max()
            }
        }
    }

    /// Visits every node in preorder.
    pub fn visit<F: FnMut(&ExprNode)>(&self, f: &mut F) {
        f(self);
        if let ExprNode::Call(_, children) = self {
            for c in children {
                c.visit(f);
            }
        }
    }

    /// Returns the subtree rooted at the given preorder index.
    pub fn subtree_at(&self, index: usize) -> Option<&ExprNode> {
        fn walk<'a>(node: &'a ExprNode, index: usize, next: &mut usize) -> Option<&'a ExprNode> {
            if *next == index {
                return Some(node);
            }
            *next += 1;
            if let ExprNode::Call(_, children) = node {
                for c in children {
                    if let Some(found) = walk(c, index, next) {
                        return Some(found);
                    }
                }
            }
            None
        }
        walk(self, index, &mut 0)
    }

    /// Returns a copy of the tree with the subtree at the given preorder
    /// index replaced. Out-of-range indices leave the tree unchanged.
    pub fn with_replaced(&self, index: usize, replacement: &ExprNode) -> ExprNode {
        fn walk(node: &ExprNode, index: usize, next: &mut usize, repl: &ExprNode) -> ExprNode {
            if *next == index {
                *next += node.size();
                return repl.clone();
            }
            *next += 1;
            match node {
                ExprNode::Call(p, children) => {
                    let rebuilt = children
                        .iter()
                        .map(|c| walk(c, index, next, repl))
                        .collect();
                    ExprNode::Call(*p, rebuilt)
                }
                leaf => leaf.clone(),
            }
        }
        walk(self, index, &mut 0, replacement)
    }

    pub fn to_sexpr(&self) -> String {
        sexpr::to_sexpr(self)
    }
}

// --- Evaluation and classification ---------------------------------------------

/// Recursive post-order evaluation of one sample row.
pub fn eval_row(expr: &ExprNode, row: &[f64]) -> Result<f64> {
    match expr {
        ExprNode::Constant(v) => Ok(*v),
        ExprNode::Feature(i) => {
            if *i < row.len() {
                Ok(row[*i])
            } else {
                Err(Error::FeatureOutOfRange {
                    index: *i,
                    n_features: row.len(),
                })
            }
        }
        ExprNode::Call(p, children) => {
            let mut args = [0.0f64; 2];
            for (slot, child) in args.iter_mut().zip(children.iter()) {
                *slot = eval_row(child, row)?;
            }
            apply_primitive(*p, &args[..children.len()])
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Sigmoid-transformed scores for every row of `rows`.
pub fn predict_proba_rows(expr: &ExprNode, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    rows.iter()
        .map(|row| eval_row(expr, row).map(sigmoid))
        .collect()
}

/// Hard labels at the given threshold; a probability exactly at the
/// threshold resolves to class 1.
pub fn predict_label_rows(expr: &ExprNode, rows: &[Vec<f64>], threshold: f64) -> Result<Vec<u8>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!(
            "classification threshold must lie in (0, 1), got {threshold}"
        )));
    }
    Ok(predict_proba_rows(expr, rows)?
        .into_iter()
        .map(|p| u8::from(p >= threshold))
        .collect())
}

// --- Function set -------------------------------------------------------------

/// The set of primitives available to the evolutionary search.
///
/// Two presets are provided: [`FunctionSetSpec::sr`] keeps the conventional
/// arithmetic set, [`FunctionSetSpec::srf`] adds the presence/absence
/// indicators and `ifelse`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSetSpec {
    enabled: Vec<Primitive>,
}

impl FunctionSetSpec {
    /// Arithmetic-only preset: add, sub, mul, div, log, sqrt, abs, neg, min, max.
    pub fn sr() -> FunctionSetSpec {
        FunctionSetSpec::from_primitives([
            Primitive::Add,
            Primitive::Sub,
            Primitive::Mul,
            Primitive::Div,
            Primitive::Log,
            Primitive::Sqrt,
            Primitive::Abs,
            Primitive::Neg,
            Primitive::Min,
            Primitive::Max,
        ])
    }

    /// The arithmetic preset plus presence, absence, presence_both,
    /// absence_both, and ifelse.
    pub fn srf() -> FunctionSetSpec {
        let mut spec = FunctionSetSpec::sr();
        for p in [
            Primitive::Presence,
            Primitive::Absence,
            Primitive::PresenceBoth,
            Primitive::AbsenceBoth,
            Primitive::IfElse,
        ] {
            spec.enabled.push(p);
        }
        spec.canonicalize();
        spec
    }

    /// Builds a set from arbitrary primitives; duplicates are collapsed and
    /// the canonical ordering of [`Primitive::ALL`] is imposed.
    pub fn from_primitives<I: IntoIterator<Item = Primitive>>(prims: I) -> FunctionSetSpec {
        let mut spec = FunctionSetSpec {
            enabled: prims.into_iter().collect(),
        };
        spec.canonicalize();
        spec
    }

    pub fn from_preset(name: &str) -> Result<FunctionSetSpec> {
        match name {
            "sr" => Ok(FunctionSetSpec::sr()),
            "srf" => Ok(FunctionSetSpec::srf()),
            other => Err(Error::Config(format!(
                "unknown function-set preset `{other}` (expected `sr` or `srf`)"
            ))),
        }
    }

    fn canonicalize(&mut self) {
        let mut ordered: Vec<Primitive> = Primitive::ALL
            .iter()
            .copied()
            .filter(|p| self.enabled.contains(p))
            .collect();
        std::mem::swap(&mut self.enabled, &mut ordered);
    }

    pub fn is_empty(&self) -> bool {
        self.enabled.is_empty()
    }

    pub fn contains(&self, p: Primitive) -> bool {
        self.enabled.contains(&p)
    }

    /// Enabled primitives in canonical order.
    pub fn primitives(&self) -> &[Primitive] {
        &self.enabled
    }

    /// Enabled primitives of one arity, in canonical order.
    pub fn primitives_with_arity(&self, arity: usize) -> Vec<Primitive> {
        self.enabled
            .iter()
            .copied()
            .filter(|p| p.arity() == arity)
            .collect()
    }
}
