//! Tree serialization: NEWICK, DOT, and the versioned JSON schema.

use std::fmt::Write as _;

use etsm_core::fmt::format_sig;
use etsm_core::{Hierarchy, HierarchyNode, Real, Result};

/// Significant digits for branch lengths and node statistics in exports.
const EXPORT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Newick,
    Dot,
    Json,
}

/// Serialize a hierarchy. All formats are deterministic: children are
/// ordered by their smallest member index and numbers carry 12 significant
/// digits.
pub fn export_tree<T: Real>(tree: &Hierarchy<T>, format: TreeFormat) -> Result<String> {
    Ok(match format {
        TreeFormat::Newick => {
            let mut out = String::new();
            newick_node(&tree.root, &tree.labels, true, &mut out);
            out.push(';');
            out.push('\n');
            out
        }
        TreeFormat::Dot => dot(tree),
        TreeFormat::Json => {
            let mut json = tree.to_json();
            json.push('\n');
            json
        }
    })
}

fn ordered_children<'a, T: Real>(node: &'a HierarchyNode<T>) -> Vec<&'a HierarchyNode<T>> {
    let mut children: Vec<&HierarchyNode<T>> = node.children.iter().collect();
    children.sort_by_key(|c| c.members.iter().min().copied());
    children
}

fn newick_node<T: Real>(node: &HierarchyNode<T>, labels: &[String], is_root: bool, out: &mut String) {
    if node.is_leaf() {
        out.push_str(&quote_newick(&leaf_name(node, labels)));
    } else {
        out.push('(');
        for (k, child) in ordered_children(node).into_iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            newick_node(child, labels, false, out);
        }
        out.push(')');
    }
    if !is_root {
        let _ = write!(out, ":{}", format_sig(node.branch_length, EXPORT_DIGITS));
    }
}

/// Multi-object leaves are named by their joined member ids.
fn leaf_name<T: Real>(node: &HierarchyNode<T>, labels: &[String]) -> String {
    let mut ids: Vec<&str> = node.members.iter().map(|&i| labels[i].as_str()).collect();
    ids.sort_unstable();
    ids.join("+")
}

fn quote_newick(name: &str) -> String {
    let needs_quoting = name
        .chars()
        .any(|c| c.is_whitespace() || "()[]{}:;,'".contains(c));
    if needs_quoting {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_string()
    }
}

fn dot<T: Real>(tree: &Hierarchy<T>) -> String {
    let mut out = String::from("digraph hierarchy {\n  node [shape=box];\n");
    let mut next_id = 0usize;
    dot_node(&tree.root, &tree.labels, &mut next_id, &mut out);
    out.push_str("}\n");
    out
}

fn dot_node<T: Real>(
    node: &HierarchyNode<T>,
    labels: &[String],
    next_id: &mut usize,
    out: &mut String,
) -> usize {
    let id = *next_id;
    *next_id += 1;
    let label = if node.is_leaf() {
        leaf_name(node, labels)
    } else {
        format!(
            "n={} t_used={} omega={}",
            node.members.len(),
            node.t_used,
            format_sig(node.omega, EXPORT_DIGITS)
        )
    };
    let _ = writeln!(out, "  n{id} [label=\"{}\"];", label.replace('"', "\\\""));
    for child in ordered_children(node) {
        let child_id = dot_node(child, labels, next_id, out);
        let _ = writeln!(
            out,
            "  n{id} -> n{child_id} [label=\"{}\"];",
            format_sig(child.branch_length, EXPORT_DIGITS)
        );
    }
    id
}
