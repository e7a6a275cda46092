//! Standalone SVG 1.1 renderings: dendrograms, radial trees, and
//! iso-hierarchy heatmaps.

use std::fmt::Write as _;

use etsm_core::{CopheneticTable, Error, Hierarchy, HierarchyNode, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    Dendrogram,
    Radial,
    Heatmap,
}

/// Layout orientation for tree renderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    TopDown,
    Radial,
}

/// How cophenetic depth maps to gray level in heatmaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shading {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub width: u32,
    pub height: u32,
    pub orientation: Orientation,
    /// Visual floor (pixels) for zero-length branches; serialized lengths
    /// are unaffected.
    pub min_branch_display: f64,
    pub shading: Shading,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 800,
            height: 600,
            orientation: Orientation::TopDown,
            min_branch_display: 6.0,
            shading: Shading::Linear,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("render dimensions must be positive".into()));
        }
        if self.min_branch_display < 0.0 {
            return Err(Error::Config("min_branch_display must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// Render a hierarchy (or its cophenetic table) as a standalone SVG
/// document. HEATMAP requires `depth_table`.
pub fn render_svg<T: Real>(
    tree: &Hierarchy<T>,
    depth_table: Option<&CopheneticTable>,
    mode: RenderMode,
    opts: &RenderOptions,
) -> Result<String> {
    opts.validate()?;
    match mode {
        RenderMode::Dendrogram => Ok(dendrogram(tree, opts)),
        RenderMode::Radial => Ok(radial(tree, opts)),
        RenderMode::Heatmap => {
            let table = depth_table.ok_or_else(|| {
                Error::Config("heatmap rendering requires a cophenetic depth table".into())
            })?;
            heatmap(tree, table, opts)
        }
    }
}

const MARGIN: f64 = 40.0;

fn svg_open(width: u32, height: u32) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" \
         version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    )
}

fn ordered<'a, T: Real>(node: &'a HierarchyNode<T>) -> Vec<&'a HierarchyNode<T>> {
    let mut children: Vec<&HierarchyNode<T>> = node.children.iter().collect();
    children.sort_by_key(|c| c.members.iter().min().copied());
    children
}

fn leaf_label<T: Real>(leaf: &HierarchyNode<T>, labels: &[String]) -> String {
    match leaf.members.len() {
        1 => labels[leaf.members[0]].clone(),
        k => format!("[{k} objects]"),
    }
}

/// Longest root-to-node sum of branch lengths.
fn max_cumulative<T: Real>(node: &HierarchyNode<T>, acc: f64) -> f64 {
    let here = acc + node.branch_length.to_f64().unwrap_or(0.0);
    node.children
        .iter()
        .map(|c| max_cumulative(c, here))
        .fold(here, f64::max)
}

fn dendrogram<T: Real>(tree: &Hierarchy<T>, opts: &RenderOptions) -> String {
    let (w, h) = (opts.width as f64, opts.height as f64);
    let leaves = tree.root.leaves();
    let n_leaves = leaves.len();
    let step = if n_leaves > 1 { (w - 2.0 * MARGIN) / (n_leaves - 1) as f64 } else { 0.0 };

    let raw_max = max_cumulative(&tree.root, 0.0);
    let scale = if raw_max > 0.0 { (h - 2.0 * MARGIN) / raw_max } else { 0.0 };

    let mut body = String::new();
    let mut next_slot = 0usize;
    layout_dendrogram(
        &tree.root,
        &tree.labels,
        MARGIN,
        scale,
        opts.min_branch_display,
        step,
        &mut next_slot,
        &mut body,
    );

    let mut out = svg_open(opts.width, opts.height);
    out.push_str(&body);
    out.push_str("</svg>\n");
    out
}

/// Returns the x coordinate of the subtree's anchor; emits its drawing.
#[allow(clippy::too_many_arguments)]
fn layout_dendrogram<T: Real>(
    node: &HierarchyNode<T>,
    labels: &[String],
    y_parent: f64,
    scale: f64,
    floor: f64,
    step: f64,
    next_slot: &mut usize,
    out: &mut String,
) -> f64 {
    let drawn = (node.branch_length.to_f64().unwrap_or(0.0) * scale).max(floor);
    let y = y_parent + drawn;
    if node.is_leaf() {
        let x = MARGIN + step * *next_slot as f64;
        *next_slot += 1;
        let _ = writeln!(
            out,
            "  <line x1=\"{x:.2}\" y1=\"{y_parent:.2}\" x2=\"{x:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(out, "  <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"black\"/>");
        let _ = writeln!(
            out,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
            y + 14.0,
            xml_escape(&leaf_label(node, labels))
        );
        return x;
    }
    let children = ordered(node);
    let xs: Vec<f64> = children
        .iter()
        .map(|c| layout_dendrogram(c, labels, y, scale, floor, step, next_slot, out))
        .collect();
    let x = (xs[0] + xs[xs.len() - 1]) / 2.0;
    // stem into this node, then the connector across its children
    let _ = writeln!(
        out,
        "  <line x1=\"{x:.2}\" y1=\"{y_parent:.2}\" x2=\"{x:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
        xs[0],
        xs[xs.len() - 1]
    );
    x
}

fn radial<T: Real>(tree: &Hierarchy<T>, opts: &RenderOptions) -> String {
    let (w, h) = (opts.width as f64, opts.height as f64);
    let center = (w / 2.0, h / 2.0);
    let raw_max = max_cumulative(&tree.root, 0.0) - tree.root.branch_length.to_f64().unwrap_or(0.0);
    let radius_budget = (w.min(h) / 2.0) - MARGIN;
    let scale = if raw_max > 0.0 { radius_budget / raw_max } else { 0.0 };

    let mut body = String::new();
    let _ = writeln!(
        body,
        "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"black\"/>",
        center.0, center.1
    );
    // the root grows upward; each split fans its children ±angle/2 around
    // the parent direction
    radial_children(
        &tree.root,
        &tree.labels,
        center,
        -std::f64::consts::FRAC_PI_2,
        scale,
        opts.min_branch_display,
        &mut body,
    );

    let mut out = svg_open(opts.width, opts.height);
    out.push_str(&body);
    out.push_str("</svg>\n");
    out
}

fn radial_children<T: Real>(
    node: &HierarchyNode<T>,
    labels: &[String],
    pos: (f64, f64),
    direction: f64,
    scale: f64,
    floor: f64,
    out: &mut String,
) {
    if node.is_leaf() {
        let _ = writeln!(
            out,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"black\"/>",
            pos.0, pos.1
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
            pos.0,
            pos.1 + 12.0,
            xml_escape(&leaf_label(node, labels))
        );
        return;
    }
    let half = node.angle_deg.to_f64().unwrap_or(0.0).to_radians() / 2.0;
    let children = ordered(node);
    for (k, child) in children.iter().enumerate() {
        let theta = if k == 0 { direction - half } else { direction + half };
        let len = (child.branch_length.to_f64().unwrap_or(0.0) * scale).max(floor);
        let end = (pos.0 + len * theta.cos(), pos.1 + len * theta.sin());
        let _ = writeln!(
            out,
            "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
            pos.0, pos.1, end.0, end.1
        );
        radial_children(child, labels, end, theta, scale, floor, out);
    }
}

fn heatmap<T: Real>(
    tree: &Hierarchy<T>,
    table: &CopheneticTable,
    opts: &RenderOptions,
) -> Result<String> {
    let n = table.n();
    if tree.root.members.len() != n {
        return Err(Error::Validation(format!(
            "depth table covers {n} objects but the tree has {}",
            tree.root.members.len()
        )));
    }
    // leaves in traversal order give the block-diagonal object ordering
    let mut order = Vec::with_capacity(n);
    traversal_order(&tree.root, &mut order);

    let (w, h) = (opts.width as f64, opts.height as f64);
    let side = (w.min(h) - 2.0 * MARGIN) / n as f64;
    let mut out = svg_open(opts.width, opts.height);
    for (r, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            let g = gray_level(table.get(i, j), table.sentinel(), opts.shading);
            let x = MARGIN + c as f64 * side;
            let y = MARGIN + r as f64 * side;
            let _ = writeln!(
                out,
                "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{side:.2}\" height=\"{side:.2}\" fill=\"rgb({g},{g},{g})\"/>"
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn traversal_order<T: Real>(node: &HierarchyNode<T>, out: &mut Vec<usize>) {
    if node.is_leaf() {
        out.extend(node.members.iter().copied());
        return;
    }
    for child in ordered(node) {
        traversal_order(child, out);
    }
}

/// Gray level monotone decreasing in depth: deeper shared nodes (greater
/// affinity) are darker; the sentinel (never separated) is black.
fn gray_level(depth: u32, sentinel: u32, shading: Shading) -> u8 {
    let f = |d: u32| -> f64 {
        match shading {
            Shading::Linear => d as f64,
            Shading::Log => (1.0 + d as f64).ln(),
        }
    };
    let frac = (f(depth.min(sentinel)) / f(sentinel)).clamp(0.0, 1.0);
    (255.0 - (255.0 * frac).round()) as u8
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use etsm_core::{build_hierarchy, cophenetic_depth, ClusterInput, Dataset, EtsmConfig, ParameterSpec};

    fn leaf(members: Vec<usize>) -> HierarchyNode<f64> {
        HierarchyNode {
            members,
            t_used: 0,
            omega: 1.0,
            branch_length: 0.0,
            angle_deg: 0.0,
            children: vec![],
        }
    }

    #[test]
    fn single_leaf_dendrogram_has_one_glyph() {
        let tree = Hierarchy { labels: vec!["A".to_string()], root: leaf(vec![0]) };
        let svg = render_svg(&tree, None, RenderMode::Dendrogram, &RenderOptions::default()).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn radial_draws_unit_omega_siblings_at_zero_separation() {
        let root = HierarchyNode {
            members: vec![0, 1],
            t_used: 4,
            omega: 1.0,
            branch_length: 4.0f64.ln(),
            angle_deg: 0.0,
            children: vec![leaf(vec![0]), leaf(vec![1])],
        };
        let tree = Hierarchy { labels: vec!["A".to_string(), "B".to_string()], root };
        let svg = render_svg(&tree, None, RenderMode::Radial, &RenderOptions::default()).unwrap();
        let lines: Vec<&str> = svg.lines().filter(|l| l.contains("<line")).collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], lines[1], "zero angle must give identical branches");
    }

    #[test]
    fn heatmap_requires_table_and_shades_monotonically() {
        let ds = Dataset::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![ParameterSpec::<f64>::xr("x", 2.0)],
            vec![0.0, 0.2, 6.0, 12.5],
        )
        .unwrap();
        let h = build_hierarchy(ClusterInput::Dataset(&ds), &EtsmConfig::default()).unwrap();
        let err = render_svg(&h, None, RenderMode::Heatmap, &RenderOptions::default());
        assert!(err.is_err());

        let table = cophenetic_depth(&h.root);
        let svg = render_svg(&h, Some(&table), RenderMode::Heatmap, &RenderOptions::default())
            .unwrap();
        let fills: Vec<u8> = svg
            .lines()
            .filter_map(|l| {
                let start = l.find("rgb(")? + 4;
                let end = l[start..].find(',')? + start;
                l[start..end].parse().ok()
            })
            .collect();
        assert_eq!(fills.len(), 16);
        // same order as the depth table over traversal order: darker = deeper
        let mut order = Vec::new();
        traversal_order(&h.root, &mut order);
        let mut pairs: Vec<(u32, u8)> = Vec::new();
        for (r, &i) in order.iter().enumerate() {
            for (c, &j) in order.iter().enumerate() {
                pairs.push((table.get(i, j), fills[r * 4 + c]));
            }
        }
        for &(d1, g1) in &pairs {
            for &(d2, g2) in &pairs {
                if d1 < d2 {
                    assert!(g1 >= g2, "depth {d1} gray {g1} vs depth {d2} gray {g2}");
                }
            }
        }
    }

    #[test]
    fn rejects_degenerate_options() {
        let tree = Hierarchy { labels: vec!["A".to_string()], root: leaf(vec![0]) };
        let opts = RenderOptions { width: 0, ..Default::default() };
        assert!(render_svg(&tree, None, RenderMode::Dendrogram, &opts).is_err());
    }
}
