//! Fixed rectangular partitions of `[0,1]^d`.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::geometry::HyperRectangle;

use super::{Cell, LocalMap, Regressor};

/// Product partition with cut sequences `0 = u_0 < ... < u_{N_k} = 1`.
///
/// `x` belongs to the cell `prod_k (u_{i_k}, u_{i_k + 1}]`; the first cell of
/// every coordinate is closed at `0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedGrid {
    cuts: Vec<Vec<f64>>,
}

impl FixedGrid {
    pub fn new(cuts: Vec<Vec<f64>>) -> Result<Self> {
        if cuts.is_empty() {
            return Err(invalid("a grid needs at least one coordinate"));
        }
        for (k, c) in cuts.iter().enumerate() {
            let ok = c.len() >= 2
                && c[0] == 0.0
                && c[c.len() - 1] == 1.0
                && c.windows(2).all(|w| w[0] < w[1]);
            if !ok {
                return Err(invalid(format!(
                    "coordinate {k}: cuts must increase strictly from 0 to 1"
                )));
            }
        }
        Ok(Self { cuts })
    }

    /// `cells_per_dim` equal slabs along each of `d` coordinates.
    pub fn uniform(d: usize, cells_per_dim: usize) -> Result<Self> {
        if cells_per_dim == 0 {
            return Err(invalid("need at least one cell per coordinate"));
        }
        let c: Vec<f64> = (0..=cells_per_dim)
            .map(|i| i as f64 / cells_per_dim as f64)
            .collect();
        Self::new(vec![c; d])
    }

    pub fn dim(&self) -> usize {
        self.cuts.len()
    }

    pub fn cuts(&self) -> &[Vec<f64>] {
        &self.cuts
    }

    pub fn cell_count(&self) -> usize {
        self.cuts.iter().map(|c| c.len() - 1).product()
    }

    /// Per-coordinate cell indices of `x`.
    pub fn locate(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        Ok(x
            .iter()
            .zip(&self.cuts)
            .map(|(&v, c)| c.partition_point(|&u| u < v).saturating_sub(1))
            .collect())
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.cuts)
            .fold(0, |acc, (&i, c)| acc * (c.len() - 1) + i)
    }

    pub fn cell_of(&self, x: &[f64]) -> Result<HyperRectangle> {
        let idx = self.locate(x)?;
        let lower = idx.iter().zip(&self.cuts).map(|(&i, c)| c[i]).collect();
        let upper = idx.iter().zip(&self.cuts).map(|(&i, c)| c[i + 1]).collect();
        HyperRectangle::new(lower, upper)
    }

    /// All cells, in row-major index order.
    pub fn cells(&self) -> Vec<HyperRectangle> {
        let mut out = Vec::with_capacity(self.cell_count());
        let mut idx = vec![0usize; self.dim()];
        loop {
            let lower = idx.iter().zip(&self.cuts).map(|(&i, c)| c[i]).collect();
            let upper = idx.iter().zip(&self.cuts).map(|(&i, c)| c[i + 1]).collect();
            out.push(HyperRectangle::new(lower, upper).expect("grid cells are valid"));
            let mut k = self.dim();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.cuts[k].len() - 1 {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

impl LocalMap for FixedGrid {
    fn cell(&self, x: &[f64]) -> Result<Cell> {
        Ok(Cell::Rect(self.cell_of(x)?))
    }
}

/// Partitioning estimator on a [`FixedGrid`] with precomputed cell sums.
#[derive(Debug, Clone)]
pub struct GridRegressor {
    grid: FixedGrid,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl GridRegressor {
    pub fn fit(grid: FixedGrid, ds: &Dataset) -> Result<Self> {
        if ds.d() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: ds.d(),
            });
        }
        let mut sums = vec![0.0; grid.cell_count()];
        let mut counts = vec![0usize; grid.cell_count()];
        for (row, y) in ds.rows().zip(ds.responses()) {
            let c = grid.flat_index(&grid.locate(row)?);
            sums[c] += y;
            counts[c] += 1;
        }
        Ok(Self { grid, sums, counts })
    }

    pub fn grid(&self) -> &FixedGrid {
        &self.grid
    }

    /// Number of sample points in the cell of `x`.
    pub fn count_at(&self, x: &[f64]) -> Result<usize> {
        Ok(self.counts[self.grid.flat_index(&self.grid.locate(x)?)])
    }
}

impl Regressor for GridRegressor {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        let c = self.grid.flat_index(&self.grid.locate(x)?);
        Ok(if self.counts[c] == 0 {
            0.0
        } else {
            self.sums[c] / self.counts[c] as f64
        })
    }
}
