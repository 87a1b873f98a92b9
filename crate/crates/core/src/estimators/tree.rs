//! Binary partition trees over a root box.
//!
//! Internal nodes carry a split `(p, u)`: the left child keeps
//! `[a, a + (b - a) u]` on coordinate `p`, the right child the rest. A point
//! goes left iff `x_p <= a + (b - a) u`. The threshold is computed once, when
//! the node is split, and stored as the left child's upper face so that
//! locating, counting and serialising all use the same number.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::geometry::{AxisBox, HyperRectangle};

use super::{mean_of, Cell, LocalMap};

/// Version tag written into serialised trees.
pub const TREE_SCHEMA_VERSION: u32 = 1;

/// A split `(p, u)`: coordinate `p` (0-based) cut at fraction `u ∈ (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub p: usize,
    pub u: f64,
}

impl SplitSpec {
    pub fn new(p: usize, u: f64) -> Result<Self> {
        if !(u > 0.0 && u < 1.0) {
            return Err(invalid(format!("split fraction must lie in (0,1), got {u}")));
        }
        Ok(Self { p, u })
    }

    /// Absolute cut position on `cell`.
    pub fn threshold(&self, cell: &HyperRectangle) -> f64 {
        let a = cell.lower()[self.p];
        let b = cell.upper()[self.p];
        a + (b - a) * self.u
    }
}

#[derive(Debug, Clone)]
struct Node {
    cell: HyperRectangle,
    depth: usize,
    split: Option<SplitSpec>,
    children: Option<(usize, usize)>,
    indices: Vec<usize>,
}

/// Arena-backed partition tree; leaves hold the indices of their sample points.
#[derive(Debug, Clone)]
pub struct PartitionTree {
    nodes: Vec<Node>,
}

/// Per-leaf shape audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafReport {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub depth: usize,
    pub count: usize,
    /// `h_+ / h_-`.
    pub beta: f64,
    /// `diam^d / volume`.
    pub gamma: f64,
}

impl PartitionTree {
    /// Single-leaf tree holding every sample point of `ds`.
    pub fn new(root: HyperRectangle, ds: &Dataset) -> Result<Self> {
        if root.dim() != ds.d() {
            return Err(Error::DimensionMismatch {
                expected: root.dim(),
                found: ds.d(),
            });
        }
        if let Some(row) = ds.rows().find(|row| !root.contains_closed(row)) {
            return Err(Error::OutOfDomain(row.to_vec()));
        }
        Ok(Self {
            nodes: vec![Node {
                cell: root,
                depth: 0,
                split: None,
                children: None,
                indices: (0..ds.n()).collect(),
            }],
        })
    }

    pub fn root(&self) -> &HyperRectangle {
        &self.nodes[0].cell
    }

    pub fn dim(&self) -> usize {
        self.root().dim()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_cell(&self, node: usize) -> &HyperRectangle {
        &self.nodes[node].cell
    }

    pub fn depth(&self, node: usize) -> usize {
        self.nodes[node].depth
    }

    pub fn split_of(&self, node: usize) -> Option<SplitSpec> {
        self.nodes[node].split
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        self.nodes[node].children
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.nodes[node].children.is_none()
    }

    /// Sample indices held by a leaf (empty for internal nodes).
    pub fn leaf_indices(&self, node: usize) -> &[usize] {
        &self.nodes[node].indices
    }

    /// Leaf node ids in arena order.
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.is_leaf(i))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Splits leaf `node` and distributes its points; returns the children.
    pub fn split(&mut self, ds: &Dataset, node: usize, spec: SplitSpec) -> Result<(usize, usize)> {
        if !self.is_leaf(node) {
            return Err(invalid(format!("node {node} is already split")));
        }
        if spec.p >= self.dim() {
            return Err(invalid(format!(
                "split coordinate {} out of range for d = {}",
                spec.p,
                self.dim()
            )));
        }
        let t = spec.threshold(&self.nodes[node].cell);
        let indices = std::mem::take(&mut self.nodes[node].indices);
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            indices.into_iter().partition(|&i| ds.row(i)[spec.p] <= t);
        let (lcell, rcell) = self.nodes[node].cell.split_at(spec.p, t);
        let depth = self.nodes[node].depth + 1;
        let l = self.push(lcell, depth, left_idx);
        let r = self.push(rcell, depth, right_idx);
        let parent = &mut self.nodes[node];
        parent.split = Some(spec);
        parent.children = Some((l, r));
        Ok((l, r))
    }

    fn push(&mut self, cell: HyperRectangle, depth: usize, indices: Vec<usize>) -> usize {
        self.nodes.push(Node {
            cell,
            depth,
            split: None,
            children: None,
            indices,
        });
        self.nodes.len() - 1
    }

    /// Leaf id containing `x`.
    pub fn locate_leaf(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.root().contains_closed(x) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        let mut id = 0;
        while let (Some((l, r)), Some(s)) = (self.nodes[id].children, self.nodes[id].split) {
            let t = self.nodes[l].cell.upper()[s.p];
            id = if x[s.p] <= t { l } else { r };
        }
        Ok(id)
    }

    pub fn leaf_reports(&self) -> Result<Vec<LeafReport>> {
        self.leaves()
            .map(|id| {
                let n = &self.nodes[id];
                Ok(LeafReport {
                    lower: n.cell.lower().to_vec(),
                    upper: n.cell.upper().to_vec(),
                    depth: n.depth,
                    count: n.indices.len(),
                    beta: n.cell.shape_ratio()?,
                    gamma: n.cell.gamma_ratio()?,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn from_doc(doc: TreeDoc) -> Result<Self> {
        if doc.schema_version != TREE_SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported tree schema version {}",
                doc.schema_version
            )));
        }
        let mut tree = Self { nodes: Vec::new() };
        tree.read_node(doc.root, 0)?;
        Ok(tree)
    }

    fn node_doc(&self, id: usize) -> NodeDoc {
        let n = &self.nodes[id];
        NodeDoc {
            lower: n.cell.lower().to_vec(),
            upper: n.cell.upper().to_vec(),
            split: n.split.map(|s| SplitDoc { p: s.p + 1, u: s.u }),
            children: n
                .children
                .map(|(l, r)| vec![self.node_doc(l), self.node_doc(r)])
                .unwrap_or_default(),
            leaf_indices: n.children.is_none().then(|| n.indices.clone()),
        }
    }

    fn read_node(&mut self, doc: NodeDoc, depth: usize) -> Result<usize> {
        let cell = HyperRectangle::new(doc.lower, doc.upper)?;
        let id = self.push(cell, depth, Vec::new());
        match (doc.split, doc.children.len()) {
            (None, 0) => {
                self.nodes[id].indices = doc.leaf_indices.unwrap_or_default();
            }
            (Some(s), 2) => {
                if s.p == 0 || s.p > self.nodes[id].cell.dim() {
                    return Err(invalid(format!("split coordinate {} out of range", s.p)));
                }
                let spec = SplitSpec::new(s.p - 1, s.u)?;
                let mut children = doc.children.into_iter();
                let l = self.read_node(children.next().expect("two children"), depth + 1)?;
                let r = self.read_node(children.next().expect("two children"), depth + 1)?;
                let (want_l, want_r) = {
                    let parent = &self.nodes[id].cell;
                    parent.split_at(spec.p, self.nodes[l].cell.upper()[spec.p])
                };
                if self.nodes[l].cell != want_l || self.nodes[r].cell != want_r {
                    return Err(invalid("children do not tile their parent"));
                }
                self.nodes[id].split = Some(spec);
                self.nodes[id].children = Some((l, r));
            }
            _ => return Err(invalid("a node needs either a split and two children or neither")),
        }
        Ok(id)
    }
}

impl Serialize for PartitionTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeDoc {
            schema_version: TREE_SCHEMA_VERSION,
            root: self.node_doc(0),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartitionTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Self::from_doc(TreeDoc::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl LocalMap for PartitionTree {
    fn cell(&self, x: &[f64]) -> Result<Cell> {
        Ok(Cell::Rect(tree_locate(self, x)?))
    }
}

/// Leaf cell containing `x`.
pub fn tree_locate(tree: &PartitionTree, x: &[f64]) -> Result<HyperRectangle> {
    Ok(tree.node_cell(tree.locate_leaf(x)?).clone())
}

/// Mean response over the leaf containing `x` (`0` for an empty leaf).
pub fn tree_predict(tree: &PartitionTree, ds: &Dataset, x: &[f64]) -> Result<f64> {
    Ok(mean_of(ds, tree.leaf_indices(tree.locate_leaf(x)?)))
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitDoc {
    /// 1-based coordinate.
    p: usize,
    u: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    lower: Vec<f64>,
    upper: Vec<f64>,
    split: Option<SplitDoc>,
    #[serde(default)]
    children: Vec<NodeDoc>,
    #[serde(default)]
    leaf_indices: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeDoc {
    schema_version: u32,
    #[serde(flatten)]
    root: NodeDoc,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::local_mean;

    fn step_data() -> Dataset {
        Dataset::new(1, vec![0.1, 0.2, 0.8, 0.9], vec![0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn root_only_predicts_global_mean() {
        let ds = step_data();
        let tree = PartitionTree::new(HyperRectangle::unit_cube(1), &ds).unwrap();
        assert_eq!(tree_predict(&tree, &ds, &[0.3]).unwrap(), 0.5);
    }

    #[test]
    fn boundary_goes_left() {
        let ds = step_data();
        let mut tree = PartitionTree::new(HyperRectangle::unit_cube(1), &ds).unwrap();
        let (l, r) = tree.split(&ds, 0, SplitSpec::new(0, 0.5).unwrap()).unwrap();
        assert_eq!(tree.locate_leaf(&[0.5]).unwrap(), l);
        assert_eq!(tree.locate_leaf(&[0.0]).unwrap(), l);
        assert_eq!(tree.locate_leaf(&[0.51]).unwrap(), r);
        assert_eq!(tree.leaf_indices(l), &[0, 1]);
        assert_eq!(tree_predict(&tree, &ds, &[0.5]).unwrap(), 0.0);
        assert!(tree.locate_leaf(&[1.2]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ds = step_data();
        let mut tree = PartitionTree::new(HyperRectangle::unit_cube(1), &ds).unwrap();
        let (l, _) = tree.split(&ds, 0, SplitSpec::new(0, 0.3).unwrap()).unwrap();
        tree.split(&ds, l, SplitSpec::new(0, 0.7).unwrap()).unwrap();
        let json = tree.to_json().unwrap();
        let back = PartitionTree::from_json(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
        for q in [0.0, 0.15, 0.21, 0.3, 0.9] {
            assert_eq!(tree_locate(&back, &[q]).unwrap(), tree_locate(&tree, &[q]).unwrap());
        }
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["split"]["p"], 1);
    }

    #[test]
    fn predictions_match_local_mean() {
        let ds = step_data();
        let mut tree = PartitionTree::new(HyperRectangle::unit_cube(1), &ds).unwrap();
        tree.split(&ds, 0, SplitSpec::new(0, 0.15).unwrap()).unwrap();
        for q in [0.0, 0.1, 0.15, 0.16, 0.5, 1.0] {
            let cell = tree.cell(&[q]).unwrap();
            assert_eq!(tree_predict(&tree, &ds, &[q]).unwrap(), local_mean(&ds, &cell));
        }
    }

    #[test]
    fn rejects_bad_fraction() {
        assert!(SplitSpec::new(0, 0.0).is_err());
        assert!(SplitSpec::new(0, 1.0).is_err());
    }
}
