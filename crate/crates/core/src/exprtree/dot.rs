//! Graphviz rendering of expression trees.

use super::ExprNode;
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Renders the tree as a DOT digraph.
///
/// Node IDs are preorder indices, so the same tree always renders to the
/// same bytes. Call nodes are labeled with the primitive name, leaves with
/// the constant value or the feature's display name.
pub fn to_dot(expr: &ExprNode, feature_names: &[String]) -> Result<String> {
    let mut out = String::from("digraph expr {\n");
    let mut next_id = 0usize;
    write_node(expr, feature_names, &mut next_id, &mut out)?;
    out.push_str("}\n");
    Ok(out)
}

fn write_node(
    expr: &ExprNode,
    feature_names: &[String],
    next_id: &mut usize,
    out: &mut String,
) -> Result<usize> {
    let id = *next_id;
    *next_id += 1;
    let label = match expr {
        ExprNode::Constant(v) => format!("{v}"),
        ExprNode::Feature(i) => feature_names
            .get(*i)
            .cloned()
            .ok_or(Error::MissingFeatureName { index: *i })?,
        ExprNode::Call(p, _) => p.name().to_string(),
    };
    let _ = writeln!(out, "  n{id} [label=\"{}\"];", escape(&label));
    if let ExprNode::Call(_, children) = expr {
        for child in children {
            let child_id = write_node(child, feature_names, next_id, out)?;
            let _ = writeln!(out, "  n{id} -> n{child_id};");
        }
    }
    Ok(id)
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}
