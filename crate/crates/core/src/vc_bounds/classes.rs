//! Finite set classes, shattering counts and brute-force VC dimension.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::squared_distance;

/// One member of a finite class of subsets of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SetShape {
    /// Half-open box `prod_k (lower_k, upper_k]`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Closed ball.
    Ball { center: Vec<f64>, radius: f64 },
    Empty,
    Everything,
}

impl SetShape {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SetShape::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&v, (&a, &b))| a < v && v <= b),
            SetShape::Ball { center, radius } => {
                squared_distance(center, x) <= radius * radius
            }
            SetShape::Empty => false,
            SetShape::Everything => true,
        }
    }
}

/// A finite, deterministically enumerated family of sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSetClass {
    d: usize,
    sets: Vec<SetShape>,
}

impl FiniteSetClass {
    pub fn new(d: usize, sets: Vec<SetShape>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d must be >= 1"));
        }
        Ok(Self { d, sets })
    }

    /// All intervals `(s, t]` with `s < t` taken from `grid`.
    pub fn intervals(grid: &[f64]) -> Self {
        Self::rectangles(grid, 1)
    }

    /// All boxes `prod_k (s_k, t_k]` with `s_k < t_k` on a common grid.
    pub fn rectangles(grid: &[f64], d: usize) -> Self {
        let mut grid = grid.to_vec();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let pairs: Vec<(f64, f64)> = grid
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| grid[i + 1..].iter().map(move |&t| (s, t)))
            .collect();

        let mut sets = Vec::new();
        let mut idx = vec![0usize; d];
        if !pairs.is_empty() {
            loop {
                sets.push(SetShape::Box {
                    lower: idx.iter().map(|&i| pairs[i].0).collect(),
                    upper: idx.iter().map(|&i| pairs[i].1).collect(),
                });
                // odometer over coordinates
                let mut k = 0;
                while k < d {
                    idx[k] += 1;
                    if idx[k] < pairs.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        Self { d, sets }
    }

    /// Closed balls with centres on `center_grid^d` and radii from `radii`.
    pub fn balls(center_grid: &[f64], radii: &[f64], d: usize) -> Self {
        let mut sets = Vec::new();
        let mut idx = vec![0usize; d];
        if !center_grid.is_empty() {
            loop {
                let center: Vec<f64> = idx.iter().map(|&i| center_grid[i]).collect();
                for &radius in radii {
                    sets.push(SetShape::Ball {
                        center: center.clone(),
                        radius,
                    });
                }
                let mut k = 0;
                while k < d {
                    idx[k] += 1;
                    if idx[k] < center_grid.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        Self { d, sets }
    }

    pub fn with_set(mut self, set: SetShape) -> Self {
        self.sets.push(set);
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[SetShape] {
        &self.sets
    }

    /// Distinct membership patterns realised on `points`, as bit vectors.
    pub fn patterns(&self, points: &[Vec<f64>]) -> HashSet<Vec<u64>> {
        let words = points.len().div_ceil(64).max(1);
        self.sets
            .iter()
            .map(|set| {
                let mut bits = vec![0u64; words];
                for (i, p) in points.iter().enumerate() {
                    if set.contains(p) {
                        bits[i / 64] |= 1 << (i % 64);
                    }
                }
                bits
            })
            .collect()
    }
}

fn check_points(d: usize, points: &[Vec<f64>]) -> Result<()> {
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].iter().any(|q| q == p) {
            return Err(Error::DuplicatePoints);
        }
    }
    Ok(())
}

/// Number of distinct binary patterns the class realises on `points`.
pub fn shatter_count(class: &FiniteSetClass, points: &[Vec<f64>]) -> Result<usize> {
    check_points(class.dim(), points)?;
    Ok(class.patterns(points).len())
}

/// Largest `n <= max_n` such that some `n`-subset of `candidates` is
/// shattered. Returns 0 when no single point is shattered.
///
/// Shattering is hereditary, so the search stops at the first size with no
/// shattered subset.
pub fn vc_dim_bruteforce(
    class: &FiniteSetClass,
    candidates: &[Vec<f64>],
    max_n: usize,
) -> Result<usize> {
    check_points(class.dim(), candidates)?;
    if max_n > 8 {
        return Err(invalid(format!("brute-force VC search is capped at 8 points, got {max_n}")));
    }
    // Membership matrix, computed once: row per set, bit per candidate.
    let membership: Vec<Vec<bool>> = class
        .sets()
        .iter()
        .map(|s| candidates.iter().map(|p| s.contains(p)).collect())
        .collect();

    let mut best = 0;
    for n in 1..=max_n.min(candidates.len()) {
        if !any_subset_shattered(&membership, candidates.len(), n) {
            break;
        }
        best = n;
    }
    Ok(best)
}

fn any_subset_shattered(membership: &[Vec<bool>], pool: usize, n: usize) -> bool {
    let mut subset: Vec<usize> = (0..n).collect();
    let full = 1usize << n;
    let mut seen = vec![false; full];
    loop {
        seen.iter_mut().for_each(|s| *s = false);
        let mut distinct = 0;
        for row in membership {
            let mask = subset
                .iter()
                .enumerate()
                .fold(0usize, |m, (j, &i)| m | (usize::from(row[i]) << j));
            if !seen[mask] {
                seen[mask] = true;
                distinct += 1;
                if distinct == full {
                    return true;
                }
            }
        }
        // next combination in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if subset[i] < pool - n + i {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..n {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn intervals_on_three_points() {
        let class = FiniteSetClass::intervals(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let points = pts(&[&[1.0], &[2.0], &[3.0]]);
        assert_eq!(shatter_count(&class, &points).unwrap(), 7);
    }

    #[test]
    fn empty_and_full_shatter_one_point() {
        let class = FiniteSetClass::new(2, vec![SetShape::Empty, SetShape::Everything]).unwrap();
        assert_eq!(shatter_count(&class, &pts(&[&[0.3, 0.4]])).unwrap(), 2);
    }

    #[test]
    fn duplicates_rejected() {
        let class = FiniteSetClass::intervals(&[0.0, 1.0]);
        assert!(matches!(
            shatter_count(&class, &pts(&[&[0.5], &[0.5]])),
            Err(Error::DuplicatePoints)
        ));
    }

    #[test]
    fn rectangles_shatter_a_diamond() {
        let grid: Vec<f64> = (0..7).map(|i| -0.5 + 0.5 * i as f64).collect();
        let class = FiniteSetClass::rectangles(&grid, 2);
        let diamond = pts(&[&[0.0, 1.0], &[1.0, 0.0], &[2.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(shatter_count(&class, &diamond).unwrap(), 16);
    }

    #[test]
    fn interval_vc_dimension() {
        let grid: Vec<f64> = (0..11).map(|i| 0.5 * i as f64).collect();
        let class = FiniteSetClass::intervals(&grid);
        let pool = pts(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        assert_eq!(vc_dim_bruteforce(&class, &pool, 4).unwrap(), 2);
    }

    #[test]
    fn nothing_shattered_gives_zero() {
        let class = FiniteSetClass::new(1, vec![SetShape::Empty]).unwrap();
        assert_eq!(vc_dim_bruteforce(&class, &pts(&[&[0.0]]), 3).unwrap(), 0);
    }
}
