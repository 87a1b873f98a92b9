//! Axis-aligned cell geometry and shape-regularity predicates.
//!
//! A cell `V` is a hyper-rectangle with side lengths `h_k`. Two notions of
//! shape regularity are supported:
//!
//! * β-SR: `h_+(V) <= β h_-(V)` (largest side against smallest side),
//! * γ-SR: `diam(V)^d <= γ λ(V)` (volume against the enclosing ball).
//!
//! All comparisons allow a relative slack of [`SR_TOLERANCE`] so that
//! boundary cases such as a ratio of exactly β are accepted.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative slack used by the shape-regularity predicates.
pub const SR_TOLERANCE: f64 = 1e-9;

/// Anything with axis-aligned side lengths.
pub trait AxisBox {
    fn dim(&self) -> usize;

    fn side(&self, k: usize) -> f64;

    fn sides(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.side(k)).collect()
    }

    /// Euclidean diameter `sqrt(sum h_k^2)`.
    fn diameter(&self) -> f64 {
        (0..self.dim()).map(|k| self.side(k).powi(2)).sum::<f64>().sqrt()
    }

    /// Lebesgue volume `prod h_k`.
    fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.side(k)).product()
    }

    /// `(h_-, h_+)`, the smallest and largest side.
    fn side_extremes(&self) -> (f64, f64) {
        (0..self.dim())
            .map(|k| self.side(k))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| {
                (lo.min(h), hi.max(h))
            })
    }

    /// `h_+ / h_-`. Fails on cells with a zero-width side.
    fn shape_ratio(&self) -> Result<f64> {
        let (h_minus, h_plus) = self.side_extremes();
        if !(h_minus > 0.0) {
            return Err(Error::DegenerateCell { h_minus, h_plus });
        }
        Ok(h_plus / h_minus)
    }

    fn is_beta_sr(&self, beta: f64) -> Result<bool> {
        if !(beta >= 1.0) {
            return Err(invalid(format!("beta must be >= 1, got {beta}")));
        }
        let (h_minus, h_plus) = self.side_extremes();
        if !(h_minus > 0.0) {
            return Err(Error::DegenerateCell { h_minus, h_plus });
        }
        Ok(h_plus <= beta * h_minus * (1.0 + SR_TOLERANCE))
    }

    /// `diam^d / volume`, the smallest γ for which the cell is γ-SR.
    fn gamma_ratio(&self) -> Result<f64> {
        let vol = self.volume();
        if !(vol > 0.0) {
            return Err(Error::DegenerateSet(vol));
        }
        Ok(self.diameter().powi(self.dim() as i32) / vol)
    }
}

/// Axis-aligned box `prod_k [lower_k, upper_k]`.
///
/// Membership of sample points follows the half-open convention
/// `(lower_k, upper_k]`, except that a lower face at `0` is closed so that
/// partitions of `[0,1]^d` cover the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRectangle {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl HyperRectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(invalid("a cell needs dimension d >= 1"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (k, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(invalid(format!(
                    "coordinate {k}: need finite lower <= upper, got [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit_cube(d: usize) -> Self {
        Self {
            lower: vec![0.0; d],
            upper: vec![1.0; d],
        }
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Closed-box membership.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&a, &b))| a <= v && v <= b)
    }

    /// Half-open membership `(a, b]` with the face at `0` closed.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&a, &b))| (a < v || (a == 0.0 && v == 0.0)) && v <= b)
    }

    /// Splits coordinate `p` at `threshold`; the left child keeps `[a, t]`.
    pub(crate) fn split_at(&self, p: usize, threshold: f64) -> (Self, Self) {
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[p] = threshold;
        right.lower[p] = threshold;
        (left, right)
    }
}

impl AxisBox for HyperRectangle {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn side(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("a ball needs dimension d >= 1"));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid(format!("radius must be finite and >= 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        squared_distance(&self.center, x) <= self.radius * self.radius
    }
}

/// Volume of the unit ball in `R^d`, via `V_d = V_{d-2} 2π/d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Shape parameters of a family of cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub beta: f64,
    pub gamma: f64,
    pub d: usize,
}

impl ShapeParams {
    /// Parameters implied by a β-SR constraint.
    pub fn from_beta(beta: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d must be >= 1"));
        }
        Ok(Self {
            beta,
            gamma: beta_to_gamma(beta, d)?,
            d,
        })
    }
}

/// Free-standing form of [`AxisBox::diameter`].
pub fn diameter(cell: &impl AxisBox) -> f64 {
    cell.diameter()
}

pub fn volume(cell: &impl AxisBox) -> f64 {
    cell.volume()
}

pub fn side_extremes(cell: &impl AxisBox) -> (f64, f64) {
    cell.side_extremes()
}

pub fn is_beta_sr(cell: &impl AxisBox, beta: f64) -> Result<bool> {
    cell.is_beta_sr(beta)
}

/// γ-SR test `diam^d <= γ λ` for an arbitrary set given its diameter and volume.
pub fn is_gamma_sr(set_diameter: f64, set_volume: f64, d: usize, gamma: f64) -> Result<bool> {
    if !(set_volume > 0.0) {
        return Err(Error::DegenerateSet(set_volume));
    }
    if !(set_diameter >= 0.0) || !(gamma > 0.0) || d == 0 {
        return Err(invalid(format!(
            "need diameter >= 0, gamma > 0, d >= 1 (got {set_diameter}, {gamma}, {d})"
        )));
    }
    Ok(set_diameter.powi(d as i32) <= gamma * set_volume * (1.0 + SR_TOLERANCE))
}

/// A β-SR rectangle is γ-SR with `γ = β^d d^(d/2)`.
pub fn beta_to_gamma(beta: f64, d: usize) -> Result<f64> {
    if !(beta >= 1.0) || d == 0 {
        return Err(invalid(format!("need beta >= 1 and d >= 1 (got {beta}, {d})")));
    }
    let d_f = d as f64;
    Ok(beta.powi(d as i32) * d_f.powf(d_f / 2.0))
}

/// A γ-SR rectangle is β-SR with `β = γ`.
pub fn gamma_to_beta(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("gamma must be > 0, got {gamma}")));
    }
    Ok(gamma)
}
