//! Local regression map estimators.
//!
//! A local map assigns to each query `x` a cell `V(x)` containing it; the
//! estimate is the average response over the sample points in that cell,
//! with `0/0 = 0` for empty cells.

mod cart;
mod grid;
mod knn;
mod tree;

pub use cart::{cart_build, cart_cost, Candidate, CartConfig, CartCost, CostFunction, Fallback};
pub use grid::{FixedGrid, GridRegressor};
pub use knn::{knn_predict, knn_radius, KdTree, KnnRegressor, Neighbors};
pub use tree::{tree_locate, tree_predict, LeafReport, PartitionTree, SplitSpec, TREE_SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;
use crate::geometry::{Ball, HyperRectangle};

/// Value of a local map: a box (grids, trees) or a ball (k-NN).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cell {
    Rect(HyperRectangle),
    Ball(Ball),
}

impl Cell {
    /// Membership under the estimator conventions: half-open boxes with the
    /// face at zero closed, closed balls.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Cell::Rect(r) => r.contains(x),
            Cell::Ball(b) => b.contains(x),
        }
    }

    pub fn diameter(&self) -> f64 {
        use crate::geometry::AxisBox;
        match self {
            Cell::Rect(r) => r.diameter(),
            Cell::Ball(b) => b.diameter(),
        }
    }

    pub fn volume(&self) -> f64 {
        use crate::geometry::AxisBox;
        match self {
            Cell::Rect(r) => r.volume(),
            Cell::Ball(b) => b.volume(),
        }
    }
}

/// Maps a query point to the cell used to localise the average.
pub trait LocalMap {
    fn cell(&self, x: &[f64]) -> Result<Cell>;
}

/// A fitted estimator `x -> ĝ(x)`.
pub trait Regressor: Sync {
    fn predict(&self, x: &[f64]) -> Result<f64>;
}

/// `Σ Y_i 1{X_i ∈ V} / Σ 1{X_i ∈ V}`, and `0` for an empty cell.
pub fn local_mean(ds: &Dataset, cell: &Cell) -> f64 {
    let (sum, count) = ds
        .rows()
        .zip(ds.responses())
        .filter(|(row, _)| cell.contains(row))
        .fold((0.0, 0usize), |(s, c), (_, y)| (s + y, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Number of sample points in `cell`.
pub fn local_count(ds: &Dataset, cell: &Cell) -> usize {
    ds.rows().filter(|row| cell.contains(row)).count()
}

pub(crate) fn mean_of(ds: &Dataset, indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let y = ds.responses();
    indices.iter().map(|&i| y[i]).sum::<f64>() / indices.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds_1d(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::new(1, x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn empty_cell_gives_zero() {
        let ds = ds_1d(&[0.1, 0.2], &[5.0, 7.0]);
        let cell = Cell::Rect(HyperRectangle::new(vec![0.5], vec![0.9]).unwrap());
        assert_eq!(local_mean(&ds, &cell), 0.0);
        assert_eq!(local_count(&ds, &cell), 0);
    }

    #[test]
    fn single_point_cell() {
        let ds = ds_1d(&[0.1, 0.6], &[5.0, 7.0]);
        let cell = Cell::Rect(HyperRectangle::new(vec![0.0], vec![0.3]).unwrap());
        assert_eq!(local_mean(&ds, &cell), 5.0);
    }

    #[test]
    fn average_of_three() {
        let ds = ds_1d(&[0.1, 0.2, 0.3, 0.9], &[1.0, 2.0, 6.0, 100.0]);
        let cell = Cell::Rect(HyperRectangle::new(vec![0.0], vec![0.5]).unwrap());
        assert_eq!(local_mean(&ds, &cell), 3.0);
        let ball = Cell::Ball(Ball::new(vec![0.2], 0.15).unwrap());
        assert_eq!(local_count(&ds, &ball), 3);
    }
}
