//! Shape-regular CART-like trees.
//!
//! Cells are grown breadth-first from `[0,1]^d`. A cell is split at the
//! cost-minimising `(p, u)` among the splits that keep both children β-SR
//! and leave at least `m` points on each side. Candidate fractions are the
//! midpoints between consecutive distinct coordinates of the cell's points,
//! plus `u = 1/2`; cost ties go to the smallest `p`, then the smallest `u`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::geometry::{AxisBox, HyperRectangle, SR_TOLERANCE};

use super::tree::{PartitionTree, SplitSpec};

/// What to do with a cell that has no β-SR split with `m` points per child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Keep the cell as a leaf.
    #[default]
    Keep,
    /// Split the largest side at `u = 1/2` whenever some split (shape
    /// ignored) leaves `m` points per child.
    LargestSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartConfig {
    pub m: usize,
    pub beta: f64,
    #[serde(default)]
    pub fallback: Fallback,
    /// Depth cap, only reachable with [`Fallback::LargestSide`] on repeated points.
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
}

fn default_max_depth() -> usize {
    64
}

impl CartConfig {
    pub fn new(m: usize, beta: f64) -> Self {
        Self {
            m,
            beta,
            fallback: Fallback::Keep,
            max_depth: default_max_depth(),
        }
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.beta >= 2.0) {
            return Err(invalid(format!("beta must be >= 2, got {}", self.beta)));
        }
        if self.m == 0 || self.m > n {
            return Err(invalid(format!("m must lie in 1..={n}, got {}", self.m)));
        }
        Ok(())
    }
}

/// One candidate cut on a coordinate, with the number of cell points at or
/// below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub u: f64,
    pub threshold: f64,
    pub left_count: usize,
}

/// Split cost `M_n((p, u), V)`.
pub trait CostFunction: Sync {
    /// Cost of one split of `cell`, whose sample points are `indices`.
    fn split_cost(
        &self,
        split: SplitSpec,
        cell: &HyperRectangle,
        ds: &Dataset,
        indices: &[usize],
    ) -> Result<f64>;

    /// Costs of every candidate on coordinate `p`; `sorted` lists the cell's
    /// points in increasing order of `x_p`.
    fn sweep(
        &self,
        p: usize,
        cell: &HyperRectangle,
        ds: &Dataset,
        sorted: &[usize],
        candidates: &[Candidate],
    ) -> Result<Vec<f64>> {
        candidates
            .iter()
            .map(|c| self.split_cost(SplitSpec { p, u: c.u }, cell, ds, sorted))
            .collect()
    }
}

/// Sum of the within-child mean squared residuals.
#[derive(Debug, Clone, Copy, Default)]
pub struct CartCost;

fn mean_sq_residual(values: impl Iterator<Item = f64> + Clone) -> Option<f64> {
    let (sum, count) = values.clone().fold((0.0, 0usize), |(s, c), y| (s + y, c + 1));
    if count == 0 {
        return None;
    }
    let mean = sum / count as f64;
    Some(values.map(|y| (y - mean).powi(2)).sum::<f64>() / count as f64)
}

impl CostFunction for CartCost {
    fn split_cost(
        &self,
        split: SplitSpec,
        cell: &HyperRectangle,
        ds: &Dataset,
        indices: &[usize],
    ) -> Result<f64> {
        let t = split.threshold(cell);
        let y = ds.responses();
        let side = |left: bool| {
            indices
                .iter()
                .filter(move |&&i| (ds.row(i)[split.p] <= t) == left)
                .map(|&i| y[i])
        };
        match (mean_sq_residual(side(true)), mean_sq_residual(side(false))) {
            (Some(l), Some(r)) => Ok(l + r),
            _ => Err(Error::EmptyChild),
        }
    }

    fn sweep(
        &self,
        _p: usize,
        _cell: &HyperRectangle,
        ds: &Dataset,
        sorted: &[usize],
        candidates: &[Candidate],
    ) -> Result<Vec<f64>> {
        // prefix sums of responses centred on the cell mean
        let y = ds.responses();
        let n = sorted.len();
        let mean = sorted.iter().map(|&i| y[i]).sum::<f64>() / n as f64;
        let mut s = Vec::with_capacity(n + 1);
        let mut q = Vec::with_capacity(n + 1);
        s.push(0.0);
        q.push(0.0);
        for &i in sorted {
            let z = y[i] - mean;
            s.push(s.last().unwrap() + z);
            q.push(q.last().unwrap() + z * z);
        }
        let within = |sum: f64, sq: f64, c: usize| {
            let c = c as f64;
            ((sq - sum * sum / c) / c).max(0.0)
        };
        candidates
            .iter()
            .map(|c| {
                let l = c.left_count;
                if l == 0 || l == n {
                    return Err(Error::EmptyChild);
                }
                Ok(within(s[l], q[l], l) + within(s[n] - s[l], q[n] - q[l], n - l))
            })
            .collect()
    }
}

/// CART cost of a single split of `cell`, evaluated over the points of `ds`
/// inside it.
pub fn cart_cost(split: SplitSpec, cell: &HyperRectangle, ds: &Dataset) -> Result<f64> {
    let indices: Vec<usize> = (0..ds.n()).filter(|&i| cell.contains(ds.row(i))).collect();
    CartCost.split_cost(split, cell, ds, &indices)
}

/// Whether cutting side `p` of `cell` at `t` leaves both children β-SR.
fn children_sr(cell: &HyperRectangle, p: usize, t: f64, beta: f64) -> bool {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in (0..cell.dim()).filter(|&k| k != p) {
        let h = cell.side(k);
        lo = lo.min(h);
        hi = hi.max(h);
    }
    let a = cell.lower()[p];
    let b = cell.upper()[p];
    [t - a, b - t]
        .into_iter()
        .all(|h| h > 0.0 && hi.max(h) <= beta * lo.min(h) * (1.0 + SR_TOLERANCE))
}

/// Relative positions `u` at which cutting side `p` keeps both children
/// β-SR, as a closed interval.
fn sr_range(cell: &HyperRectangle, p: usize, beta: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in (0..cell.dim()).filter(|&k| k != p) {
        let h = cell.side(k);
        lo = lo.min(h);
        hi = hi.max(h);
    }
    if cell.dim() == 1 {
        return Some((0.0, 1.0));
    }
    let h = cell.side(p);
    let (small, large) = (hi / beta, beta * lo);
    let range = (small.max(h - large) / h, large.min(h - small) / h);
    (range.0 <= range.1).then_some(range)
}

/// Midpoints of the gaps between consecutive distinct values, plus `1/2`.
/// A gap whose midpoint falls outside the β-SR range but which still meets
/// it also gets the nearest in-range point, so every shape-regular
/// partition of the cell's points has a representative.
fn candidates_on(cell: &HyperRectangle, p: usize, ds: &Dataset, sorted: &[usize], beta: f64) -> Vec<Candidate> {
    let a = cell.lower()[p];
    let b = cell.upper()[p];
    let width = b - a;
    let range = sr_range(cell, p, beta);
    let mut us = vec![0.5];
    for w in sorted.windows(2) {
        let (lo, hi) = (ds.row(w[0])[p], ds.row(w[1])[p]);
        if lo >= hi {
            continue;
        }
        let (ga, gb) = ((lo - a) / width, (hi - a) / width);
        let mid = (ga + gb) / 2.0;
        us.push(mid);
        if let Some((r0, r1)) = range {
            let u = mid.clamp(r0, r1);
            if u != mid && ga <= u && u < gb {
                us.push(u);
            }
        }
    }
    us.sort_by(f64::total_cmp);
    us.dedup();
    us.into_iter()
        .filter(|&u| u > 0.0 && u < 1.0)
        .filter_map(|u| {
            let t = a + width * u;
            (t > a && t < b).then(|| Candidate {
                u,
                threshold: t,
                left_count: sorted.partition_point(|&i| ds.row(i)[p] <= t),
            })
        })
        .collect()
}

/// Outcome of the split search on one cell.
enum Choice {
    Split(SplitSpec),
    /// No β-SR split, but `S_m` is nonempty.
    MassOnly,
    None,
}

fn choose_split(
    tree: &PartitionTree,
    node: usize,
    ds: &Dataset,
    cfg: &CartConfig,
    cost: &dyn CostFunction,
) -> Result<Choice> {
    let cell = tree.node_cell(node);
    let indices = tree.leaf_indices(node);
    if indices.len() < 2 * cfg.m {
        return Ok(Choice::None);
    }
    let mut best: Option<(f64, SplitSpec)> = None;
    let mut mass_ok = false;
    for p in 0..cell.dim() {
        let mut sorted = indices.to_vec();
        sorted.sort_by(|&i, &j| ds.row(i)[p].total_cmp(&ds.row(j)[p]).then(i.cmp(&j)));
        let feasible: Vec<Candidate> = candidates_on(cell, p, ds, &sorted, cfg.beta)
            .into_iter()
            .filter(|c| c.left_count >= cfg.m && sorted.len() - c.left_count >= cfg.m)
            .inspect(|_| mass_ok = true)
            .filter(|c| children_sr(cell, p, c.threshold, cfg.beta))
            .collect();
        if feasible.is_empty() {
            continue;
        }
        let costs = cost.sweep(p, cell, ds, &sorted, &feasible)?;
        for (c, v) in feasible.iter().zip(costs) {
            if !v.is_finite() {
                return Err(invalid(format!("non-finite split cost {v}")));
            }
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, SplitSpec { p, u: c.u }));
            }
        }
    }
    Ok(match best {
        Some((_, s)) => Choice::Split(s),
        None if mass_ok => Choice::MassOnly,
        None => Choice::None,
    })
}

/// Grows a CART-like tree on `[0,1]^d`.
pub fn cart_build(ds: &Dataset, cfg: &CartConfig, cost: &dyn CostFunction) -> Result<PartitionTree> {
    cfg.validate(ds.n())?;
    let mut tree = PartitionTree::new(HyperRectangle::unit_cube(ds.d()), ds)?;
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        if tree.depth(node) >= cfg.max_depth {
            continue;
        }
        let spec = match choose_split(&tree, node, ds, cfg, cost)? {
            Choice::Split(s) => s,
            Choice::MassOnly if cfg.fallback == Fallback::LargestSide => {
                let sides = tree.node_cell(node).sides();
                let p = (0..sides.len())
                    .fold(0, |best, k| if sides[k] > sides[best] { k } else { best });
                SplitSpec { p, u: 0.5 }
            }
            _ => continue,
        };
        let (l, r) = tree.split(ds, node, spec)?;
        queue.push_back(l);
        queue.push_back(r);
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HyperRectangle;

    fn step_data() -> Dataset {
        Dataset::new(1, vec![0.1, 0.2, 0.8, 0.9], vec![0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn cost_of_clean_split_is_zero() {
        let cube = HyperRectangle::unit_cube(1);
        let c = cart_cost(SplitSpec::new(0, 0.5).unwrap(), &cube, &step_data()).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn cost_with_singleton_child() {
        // right child {0, 1, 1}: mean 2/3, residuals 4/9 + 1/9 + 1/9 over 3
        let cube = HyperRectangle::unit_cube(1);
        let c = cart_cost(SplitSpec::new(0, 0.15).unwrap(), &cube, &step_data()).unwrap();
        assert!((c - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn empty_child_is_an_error() {
        let cube = HyperRectangle::unit_cube(1);
        let r = cart_cost(SplitSpec::new(0, 0.05).unwrap(), &cube, &step_data());
        assert!(matches!(r, Err(Error::EmptyChild)));
    }

    #[test]
    fn sweep_matches_naive_cost() {
        let ds = step_data();
        let cube = HyperRectangle::unit_cube(1);
        let sorted = vec![0, 1, 2, 3];
        let cands = candidates_on(&cube, 0, &ds, &sorted, 2.0);
        let fast = CartCost.sweep(0, &cube, &ds, &sorted, &cands).unwrap();
        for (c, v) in cands.iter().zip(fast) {
            let slow = cart_cost(SplitSpec::new(0, c.u).unwrap(), &cube, &ds).unwrap();
            assert!((v - slow).abs() < 1e-14);
        }
    }

    #[test]
    fn gap_straddling_the_shape_range_is_represented() {
        // Cell [0,1] x [0,0.5] split on x1 with β = 2: u must lie in [1/4, 3/4].
        // The gap (0.1, 0.3) has its midpoint outside but reaches into the range.
        let cell = HyperRectangle::new(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
        assert_eq!(sr_range(&cell, 0, 2.0), Some((0.25, 0.75)));
        let rows = vec![vec![0.1, 0.1], vec![0.3, 0.2], vec![0.95, 0.3]];
        let ds = Dataset::from_rows(&rows, vec![0.0, 1.0, 2.0]).unwrap();
        let sorted = vec![0, 1, 2];
        let us = |beta: f64| -> Vec<f64> {
            candidates_on(&cell, 0, &ds, &sorted, beta).iter().map(|c| c.u).collect()
        };
        let close = |a: Vec<f64>, b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
        };
        assert!(close(us(2.0), &[0.2, 0.25, 0.5, 0.625]), "{:?}", us(2.0));
        assert!(close(us(8.0), &[0.2, 0.5, 0.625]), "{:?}", us(8.0));
    }

    #[test]
    fn step_data_splits_between_clusters() {
        let ds = step_data();
        let tree = cart_build(&ds, &CartConfig::new(2, 2.0), &CartCost).unwrap();
        assert_eq!(tree.leaf_count(), 2);
        let s = tree.split_of(0).unwrap();
        assert_eq!(s.p, 0);
        assert_eq!(s.u, 0.5);
    }

    #[test]
    fn too_few_points_gives_root_leaf() {
        let ds = step_data();
        let tree = cart_build(&ds, &CartConfig::new(3, 2.0), &CartCost).unwrap();
        assert_eq!(tree.leaf_count(), 1);
    }

    #[test]
    fn rejects_small_beta() {
        assert!(cart_build(&step_data(), &CartConfig::new(1, 1.5), &CartCost).is_err());
    }

    #[test]
    fn largest_side_fallback_ignores_shape() {
        // all points in one corner column: no β-SR split separates them
        let x: Vec<f64> = (0..8).flat_map(|i| [0.01, 0.1 + 0.1 * i as f64]).collect();
        let y = vec![0.0; 8];
        let ds = Dataset::new(2, x, y).unwrap();
        let keep = cart_build(&ds, &CartConfig::new(2, 2.0), &CartCost).unwrap();
        let lit = cart_build(
            &ds,
            &CartConfig::new(2, 2.0).with_fallback(Fallback::LargestSide),
            &CartCost,
        )
        .unwrap();
        assert!(lit.leaf_count() >= keep.leaf_count());
        for leaf in keep.leaves() {
            assert!(keep.node_cell(leaf).is_beta_sr(2.0).unwrap());
        }
    }
}
