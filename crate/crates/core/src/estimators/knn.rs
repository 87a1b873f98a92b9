//! k-nearest-neighbour regression.
//!
//! Neighbours are ranked by `(squared distance, sample index)`, so the
//! k-NN ball is closed and ties at the radius are resolved by ascending
//! index: exactly `k` indices are returned and `n P_n(V(x)) = k`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::geometry::{squared_distance, Ball};

use super::{Cell, LocalMap, Regressor};

/// The `k` nearest sample points of a query, in rank order.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    /// Distance to the k-th neighbour.
    pub radius: f64,
    /// Sample indices, nearest first.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ranked {
    dist2: f64,
    index: usize,
}

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_query(ds: &Dataset, x: &[f64], k: usize) -> Result<()> {
    if x.len() != ds.d() {
        return Err(Error::DimensionMismatch {
            expected: ds.d(),
            found: x.len(),
        });
    }
    if k == 0 || k > ds.n() {
        return Err(invalid(format!("k must lie in 1..={}, got {k}", ds.n())));
    }
    Ok(())
}

fn finish(mut ranked: Vec<Ranked>) -> Neighbors {
    ranked.sort_unstable();
    Neighbors {
        radius: ranked.last().map_or(0.0, |r| r.dist2.sqrt()),
        indices: ranked.into_iter().map(|r| r.index).collect(),
    }
}

fn average(ds: &Dataset, nb: &Neighbors) -> f64 {
    let y = ds.responses();
    nb.indices.iter().map(|&i| y[i]).sum::<f64>() / nb.indices.len() as f64
}

/// k-NN radius and neighbour indices by a linear scan.
pub fn knn_radius(ds: &Dataset, x: &[f64], k: usize) -> Result<Neighbors> {
    check_query(ds, x, k)?;
    let mut ranked: Vec<Ranked> = ds
        .rows()
        .enumerate()
        .map(|(index, row)| Ranked {
            dist2: squared_distance(row, x),
            index,
        })
        .collect();
    if k < ranked.len() {
        ranked.select_nth_unstable(k - 1);
        ranked.truncate(k);
    }
    Ok(finish(ranked))
}

/// Average response of the `k` nearest neighbours, summed in rank order.
pub fn knn_predict(ds: &Dataset, x: &[f64], k: usize) -> Result<f64> {
    Ok(average(ds, &knn_radius(ds, x, k)?))
}

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    /// Tight bounding box of the points below this node.
    lower: Vec<f64>,
    upper: Vec<f64>,
    children: Option<(usize, usize)>,
}

/// Static k-d tree over the rows of a dataset.
#[derive(Debug, Clone)]
pub struct KdTree {
    d: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(ds: &Dataset) -> Self {
        let mut tree = KdTree {
            d: ds.d(),
            order: (0..ds.n()).collect(),
            nodes: Vec::new(),
        };
        tree.build_node(ds, 0, ds.n());
        tree
    }

    fn build_node(&mut self, ds: &Dataset, start: usize, end: usize) -> usize {
        let d = self.d;
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            for (k, &v) in ds.row(i).iter().enumerate() {
                lower[k] = lower[k].min(v);
                upper[k] = upper[k].max(v);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            lower,
            upper,
            children: None,
        });
        if end - start > LEAF_SIZE {
            let node = &self.nodes[id];
            let axis = (0..d)
                .max_by(|&a, &b| {
                    (node.upper[a] - node.lower[a]).total_cmp(&(node.upper[b] - node.lower[b]))
                })
                .unwrap_or(0);
            let mid = start + (end - start) / 2;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                ds.row(a)[axis].total_cmp(&ds.row(b)[axis])
            });
            let left = self.build_node(ds, start, mid);
            let right = self.build_node(ds, mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    fn box_dist2(node: &Node, x: &[f64]) -> f64 {
        x.iter()
            .zip(node.lower.iter().zip(&node.upper))
            .map(|(&v, (&a, &b))| {
                let gap = if v < a {
                    a - v
                } else if v > b {
                    v - b
                } else {
                    0.0
                };
                gap * gap
            })
            .sum()
    }

    /// Exact k nearest neighbours under the `(distance, index)` order.
    pub fn nearest(&self, ds: &Dataset, x: &[f64], k: usize) -> Result<Neighbors> {
        check_query(ds, x, k)?;
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(ds, 0, x, k, &mut heap);
        Ok(finish(heap.into_vec()))
    }

    fn search(&self, ds: &Dataset, id: usize, x: &[f64], k: usize, heap: &mut BinaryHeap<Ranked>) {
        let node = &self.nodes[id];
        match node.children {
            None => {
                for &index in &self.order[node.start..node.end] {
                    let cand = Ranked {
                        dist2: squared_distance(ds.row(index), x),
                        index,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if heap.peek().is_some_and(|worst| cand < *worst) {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Some((left, right)) => {
                let dl = Self::box_dist2(&self.nodes[left], x);
                let dr = Self::box_dist2(&self.nodes[right], x);
                let visits = if dl <= dr {
                    [(left, dl), (right, dr)]
                } else {
                    [(right, dr), (left, dl)]
                };
                for (child, dist) in visits {
                    // `<=`: a box at exactly the current radius may hold a
                    // tied point with a smaller index.
                    let worth = heap.len() < k || heap.peek().is_some_and(|w| dist <= w.dist2);
                    if worth {
                        self.search(ds, child, x, k, heap);
                    }
                }
            }
        }
    }
}

/// k-NN estimator backed by a [`KdTree`].
#[derive(Debug, Clone)]
pub struct KnnRegressor<'a> {
    ds: &'a Dataset,
    tree: KdTree,
    k: usize,
}

impl<'a> KnnRegressor<'a> {
    pub fn fit(ds: &'a Dataset, k: usize) -> Result<Self> {
        if k == 0 || k > ds.n() {
            return Err(invalid(format!("k must lie in 1..={}, got {k}", ds.n())));
        }
        Ok(Self {
            ds,
            tree: KdTree::build(ds),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, x: &[f64]) -> Result<Neighbors> {
        self.tree.nearest(self.ds, x, self.k)
    }
}

impl Regressor for KnnRegressor<'_> {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(average(self.ds, &self.neighbors(x)?))
    }
}

impl LocalMap for KnnRegressor<'_> {
    fn cell(&self, x: &[f64]) -> Result<Cell> {
        let nb = self.neighbors(x)?;
        Ok(Cell::Ball(Ball::new(x.to_vec(), nb.radius)?))
    }
}
