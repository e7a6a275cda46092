//! Recursive bifurcation into a binary hierarchy with branch geometry and
//! cophenetic depth.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::etsm::{iterate, transform_step, EtsmConfig, MeanMode, Split};
use crate::matrix::{MatrixKind, SimilarityMatrix};
use crate::scalar::Real;
use crate::similarity::similarity_matrix;

/// Version tag written into serialized trees.
pub const TREE_FORMAT_VERSION: u32 = 1;

/// One node of the binary hierarchy.
///
/// `members` are indices into the original object list. Leaves have no
/// children, `t_used` 0 and `omega` 1; internal nodes carry the iteration
/// count and inter-group constant of the split that divided them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierarchyNode<T> {
    pub members: Vec<usize>,
    pub t_used: usize,
    pub omega: T,
    pub branch_length: T,
    pub angle_deg: T,
    pub children: Vec<HierarchyNode<T>>,
}

impl<T: Real> HierarchyNode<T> {
    fn leaf(members: Vec<usize>) -> Self {
        HierarchyNode {
            members,
            t_used: 0,
            omega: T::one(),
            branch_length: T::zero(),
            angle_deg: T::zero(),
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<&HierarchyNode<T>> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            if node.is_leaf() {
                out.push(node);
            } else {
                for child in node.children.iter().rev() {
                    stack.push(child);
                }
            }
        }
        out
    }

    /// Count of internal (splitting) nodes.
    pub fn internal_count(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            1 + self.children.iter().map(Self::internal_count).sum::<usize>()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Validation("hierarchy node with no members".into()));
        }
        match self.children.len() {
            0 => Ok(()),
            2 => {
                let mut union: Vec<usize> = self
                    .children
                    .iter()
                    .flat_map(|c| c.members.iter().copied())
                    .collect();
                union.sort_unstable();
                let mut mine = self.members.clone();
                mine.sort_unstable();
                if union != mine
                    || self.children[0].members.is_empty()
                    || self.children[1].members.is_empty()
                {
                    return Err(Error::Validation(
                        "children must partition the parent's member set".into(),
                    ));
                }
                for c in &self.children {
                    c.validate()?;
                }
                Ok(())
            }
            k => Err(Error::Validation(format!("node has {k} children, expected 0 or 2"))),
        }
    }
}

/// A complete hierarchy: the object labels plus the root node.
#[derive(Debug, Clone)]
pub struct Hierarchy<T> {
    pub labels: Vec<String>,
    pub root: HierarchyNode<T>,
}

#[derive(Serialize, Deserialize)]
struct VersionedTree<T> {
    version: u32,
    labels: Vec<String>,
    root: HierarchyNode<T>,
}

impl<T: Real> Hierarchy<T> {
    /// Serialize as versioned JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&VersionedTree {
            version: TREE_FORMAT_VERSION,
            labels: self.labels.clone(),
            root: self.root.clone(),
        })
        .expect("tree serialization cannot fail")
    }

    /// Parse and structurally validate a tree produced by [`Hierarchy::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let tree: VersionedTree<T> = serde_json::from_str(text)?;
        if tree.version != TREE_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported tree format version {} (expected {TREE_FORMAT_VERSION})",
                tree.version
            )));
        }
        tree.root.validate()?;
        let max = tree.root.members.iter().copied().max().unwrap_or(0);
        if max >= tree.labels.len() {
            return Err(Error::Validation(format!(
                "member index {max} exceeds the {} labels",
                tree.labels.len()
            )));
        }
        Ok(Hierarchy { labels: tree.labels, root: tree.root })
    }
}

/// Branch geometry of an internal node: length ln(T) and the angle between
/// its two child branches, arccos(exp(Ω − 1)) in degrees.
///
/// Note the angle formula, taken as printed, spans [0°, ~68.43°]: Ω = 1
/// gives 0° but Ω = 0 gives arccos(e⁻¹) ≈ 68.4°, not the 180° a full
/// anti-similarity might suggest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry<T> {
    pub branch_length: T,
    pub angle_deg: T,
}

pub fn node_geometry<T: Real>(t_used: usize, omega: T) -> NodeGeometry<T> {
    let t = T::from_usize(t_used.max(1)).expect("iteration count fits the scalar");
    // omega may carry float noise a hair above 1; clamp before acos
    let x = (omega - T::one()).exp().min(T::one());
    NodeGeometry {
        branch_length: t.ln(),
        angle_deg: x.acos().to_degrees(),
    }
}

/// Input to [`build_hierarchy`]: a raw dataset (routed through the metric
/// pipeline) or an already-built matrix.
#[derive(Debug, Clone, Copy)]
pub enum ClusterInput<'a, T> {
    Dataset(&'a Dataset<T>),
    Matrix(&'a SimilarityMatrix<T>),
}

impl<'a, T> From<&'a Dataset<T>> for ClusterInput<'a, T> {
    fn from(d: &'a Dataset<T>) -> Self {
        ClusterInput::Dataset(d)
    }
}

impl<'a, T> From<&'a SimilarityMatrix<T>> for ClusterInput<'a, T> {
    fn from(m: &'a SimilarityMatrix<T>) -> Self {
        ClusterInput::Matrix(m)
    }
}

/// Recursively bifurcate the input into a binary hierarchy.
///
/// Every cluster's matrix is recomputed from the *raw* input restricted to
/// its members — never from the converged parent matrix, which is closed
/// over its own members and carries no intra-group structure. Clusters stop
/// splitting when they are single objects, homogeneous (all pairwise
/// similarities within `homogeneity_tol` of 1, or distances within it of
/// 0), or homogeneous under extraction; two-object clusters split directly
/// with t = 1 since a 2×2 matrix is a fixed point of the transform.
pub fn build_hierarchy<T: Real>(
    input: ClusterInput<'_, T>,
    config: &EtsmConfig<T>,
) -> Result<Hierarchy<T>> {
    config.validate()?;
    let raw = match input {
        ClusterInput::Dataset(d) => similarity_matrix(d)?,
        ClusterInput::Matrix(m) => m.clone(),
    };
    let members: Vec<usize> = (0..raw.n()).collect();
    let root = build_cluster(&raw, members, config)?;
    Ok(Hierarchy { labels: raw.labels().to_vec(), root })
}

fn build_cluster<T: Real>(
    raw: &SimilarityMatrix<T>,
    members: Vec<usize>,
    config: &EtsmConfig<T>,
) -> Result<HierarchyNode<T>> {
    if members.len() == 1 {
        return Ok(HierarchyNode::leaf(members));
    }
    let sub = raw.restrict(&members);
    if is_homogeneous(&sub, config.homogeneity_tol) {
        return Ok(HierarchyNode::leaf(members));
    }
    if members.len() == 2 {
        let omega = match sub.kind() {
            MatrixKind::Similarity => sub.get(0, 1),
            // distances are not similarities; one arithmetic step maps the
            // pair onto the similarity scale (0 for distinct points)
            MatrixKind::Dissimilarity => in_cluster(&members, raw, || {
                Ok(transform_step(&sub, MeanMode::Arithmetic)?.get(0, 1))
            })?,
        };
        let geometry = node_geometry(1, omega);
        return Ok(HierarchyNode {
            children: vec![
                HierarchyNode::leaf(vec![members[0]]),
                HierarchyNode::leaf(vec![members[1]]),
            ],
            members,
            t_used: 1,
            omega,
            branch_length: geometry.branch_length,
            angle_deg: geometry.angle_deg,
        });
    }

    let outcome = in_cluster(&members, raw, || iterate(&sub, config, None))?;
    match outcome.split {
        Split::Homogeneous => Ok(HierarchyNode::leaf(members)),
        Split::Two { partition, omega, .. } => {
            let to_global = |local: &[usize]| -> Vec<usize> {
                local.iter().map(|&l| members[l]).collect()
            };
            let mut sides = [to_global(&partition.left), to_global(&partition.right)];
            // canonical child order: the side holding the smallest index first
            if sides[1].iter().min() < sides[0].iter().min() {
                sides.swap(0, 1);
            }
            let [left, right] = sides;
            let (left, right) = if left.len().min(right.len()) >= 16 {
                let (l, r) = rayon::join(
                    || build_cluster(raw, left, config),
                    || build_cluster(raw, right, config),
                );
                (l?, r?)
            } else {
                (
                    build_cluster(raw, left, config)?,
                    build_cluster(raw, right, config)?,
                )
            };
            let geometry = node_geometry(outcome.t_used, omega);
            Ok(HierarchyNode {
                members,
                t_used: outcome.t_used,
                omega,
                branch_length: geometry.branch_length,
                angle_deg: geometry.angle_deg,
                children: vec![left, right],
            })
        }
    }
}

fn is_homogeneous<T: Real>(m: &SimilarityMatrix<T>, tol: T) -> bool {
    match m.kind() {
        MatrixKind::Similarity => m.min_off_diagonal() >= T::one() - tol,
        MatrixKind::Dissimilarity => m.max_off_diagonal() <= tol,
    }
}

fn in_cluster<T: Real, R>(
    members: &[usize],
    raw: &SimilarityMatrix<T>,
    f: impl FnOnce() -> Result<R>,
) -> Result<R> {
    f().map_err(|e| Error::Cluster {
        members: members
            .iter()
            .map(|&i| raw.labels()[i].as_str())
            .collect::<Vec<_>>()
            .join(","),
        source: Box::new(e),
    })
}

/// Cophenetic depth table.
///
/// Entry (i, j) counts the split cycles from the root until i and j first
/// land in different clusters; pairs that never separate (shared leaf, or
/// the diagonal) carry the sentinel value n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopheneticTable {
    n: usize,
    data: Vec<u32>,
}

impl CopheneticTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sentinel(&self) -> u32 {
        self.n as u32
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    /// Largest finite (non-sentinel) depth, if any pair separates.
    pub fn max_finite(&self) -> Option<u32> {
        self.data.iter().copied().filter(|&d| d != self.sentinel()).max()
    }
}

/// Compute the cophenetic depth table of a tree whose root covers
/// indices 0..n.
pub fn cophenetic_depth<T: Real>(root: &HierarchyNode<T>) -> CopheneticTable {
    let n = root.members.len();
    let mut data = vec![n as u32; n * n];
    fill_depths(root, 1, &mut data, n);
    CopheneticTable { n, data }
}

fn fill_depths<T: Real>(node: &HierarchyNode<T>, cycle: u32, data: &mut [u32], n: usize) {
    if node.is_leaf() {
        return;
    }
    let (a, b) = (&node.children[0], &node.children[1]);
    for &i in &a.members {
        for &j in &b.members {
            data[i * n + j] = cycle;
            data[j * n + i] = cycle;
        }
    }
    fill_depths(a, cycle + 1, data, n);
    fill_depths(b, cycle + 1, data, n);
}
