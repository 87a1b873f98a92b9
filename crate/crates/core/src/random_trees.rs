//! Purely random trees followed along the path to a query point.
//!
//! Only the cell containing `x` is tracked. After 50 uniform splits a side
//! can be as small as `e^-50`, far below the spacing of doubles near `0.5`,
//! so a [`PathCell`] stores each side length together with the distances
//! from `x` to the two faces rather than absolute face positions.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{AxisBox, HyperRectangle};
use crate::rng::seeded;

/// Split law of a purely random tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    /// `S_i ~ U(0,1)`.
    Uniform,
    /// `S_i = 1/2`.
    Centered,
}

impl std::str::FromStr for TreeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "centered" | "centred" => Ok(Self::Centered),
            _ => Err(invalid(format!("unknown tree kind `{s}`"))),
        }
    }
}

/// One recorded split: coordinate `D` (1-based), fraction `S` and the side
/// reduction `S_bar` of the cell that kept `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStep {
    pub step: usize,
    #[serde(rename = "D")]
    pub coord: usize,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_bar")]
    pub s_bar: f64,
}

/// The randomness `(D_i, S_i)` of one path, with the induced `S̄_i`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitSequence {
    pub steps: Vec<SplitStep>,
}

impl SplitSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `prod_i S̄_i`.
    pub fn reduction_product(&self) -> f64 {
        self.steps.iter().map(|s| s.s_bar).product()
    }

    /// Number of splits along each coordinate.
    pub fn direction_counts(&self, d: usize) -> Vec<usize> {
        let mut counts = vec![0; d];
        for s in &self.steps {
            counts[s.coord - 1] += 1;
        }
        counts
    }
}

/// Cell of a query point, stored relative to the point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCell {
    x: Vec<f64>,
    sides: Vec<f64>,
    /// `x_k - a_k`.
    below: Vec<f64>,
}

impl PathCell {
    pub fn unit(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(invalid("need dimension d >= 1"));
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        Ok(Self {
            x: x.to_vec(),
            sides: vec![1.0; x.len()],
            below: x.to_vec(),
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    /// Cuts side `k` at fraction `s` and keeps the child holding `x`
    /// (the left one on a tie). Returns `S̄`.
    pub fn split(&mut self, k: usize, s: f64) -> f64 {
        let cut = self.sides[k] * s;
        if self.below[k] <= cut {
            self.sides[k] *= s;
            s
        } else {
            self.below[k] -= cut;
            self.sides[k] *= 1.0 - s;
            1.0 - s
        }
    }

    /// Absolute coordinates; sides below the resolution of `x` are lost.
    pub fn to_rectangle(&self) -> Result<HyperRectangle> {
        let lower: Vec<f64> = self.x.iter().zip(&self.below).map(|(x, b)| x - b).collect();
        let upper = lower.iter().zip(&self.sides).map(|(a, h)| a + h).collect();
        HyperRectangle::new(lower, upper)
    }
}

impl AxisBox for PathCell {
    fn dim(&self) -> usize {
        self.sides.len()
    }

    fn side(&self, k: usize) -> f64 {
        self.sides[k]
    }
}

/// `N` splits of a uniform or centered tree along the path to `x`.
pub fn grow_path_with<R: Rng + ?Sized>(
    kind: TreeKind,
    x: &[f64],
    n_steps: usize,
    rng: &mut R,
) -> Result<(PathCell, SplitSequence)> {
    let mut cell = PathCell::unit(x)?;
    let d = x.len();
    let mut seq = SplitSequence {
        steps: Vec::with_capacity(n_steps),
    };
    for step in 1..=n_steps {
        let k = rng.random_range(0..d);
        let s = match kind {
            TreeKind::Uniform => Open01.sample(rng),
            TreeKind::Centered => 0.5,
        };
        let s_bar = cell.split(k, s);
        seq.steps.push(SplitStep {
            step,
            coord: k + 1,
            s,
            s_bar,
        });
    }
    Ok((cell, seq))
}

pub fn grow_path(kind: TreeKind, x: &[f64], n_steps: usize, seed: u64) -> Result<(PathCell, SplitSequence)> {
    grow_path_with(kind, x, n_steps, &mut seeded(seed))
}

/// Whether `volume(cell) = prod S̄_i` to 1e-12 relative.
pub fn volume_invariance_check(cell: &impl AxisBox, seq: &SplitSequence) -> bool {
    let lhs = cell.volume();
    let rhs = seq.reduction_product();
    (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(lhs.abs())
}

/// `h_+ / h_-`.
pub fn shape_ratio(cell: &impl AxisBox) -> Result<f64> {
    cell.shape_ratio()
}

/// Lifetime and dimension of a Mondrian process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MondrianParams {
    pub lifetime: f64,
    pub d: usize,
}

impl MondrianParams {
    pub fn new(lifetime: f64, d: usize) -> Result<Self> {
        if !(lifetime > 0.0 && lifetime.is_finite()) {
            return Err(invalid(format!("lifetime must be positive, got {lifetime}")));
        }
        if d == 0 {
            return Err(invalid("need dimension d >= 1"));
        }
        Ok(Self { lifetime, d })
    }
}

/// Mondrian cell of `x` at lifetime `λ`, simulated along the path only.
///
/// Waiting times are exponential with rate `sum_k h_k`; the split side is
/// picked with probability proportional to its length and cut uniformly.
pub fn mondrian_cell_with<R: Rng + ?Sized>(
    params: &MondrianParams,
    x: &[f64],
    rng: &mut R,
) -> Result<(PathCell, SplitSequence)> {
    if x.len() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            found: x.len(),
        });
    }
    let mut cell = PathCell::unit(x)?;
    let mut seq = SplitSequence::default();
    let mut time = 0.0;
    loop {
        let linear: f64 = cell.sides.iter().sum();
        let wait = Exp::new(linear)
            .map_err(|e| invalid(format!("exponential rate {linear}: {e}")))?
            .sample(rng);
        time += wait;
        if time > params.lifetime {
            break;
        }
        let mut pick = rng.random::<f64>() * linear;
        let mut k = params.d - 1;
        for (j, &h) in cell.sides.iter().enumerate() {
            if pick < h {
                k = j;
                break;
            }
            pick -= h;
        }
        let s: f64 = Open01.sample(rng);
        let s_bar = cell.split(k, s);
        seq.steps.push(SplitStep {
            step: seq.steps.len() + 1,
            coord: k + 1,
            s,
            s_bar,
        });
    }
    Ok((cell, seq))
}

pub fn mondrian_cell(params: &MondrianParams, x: &[f64], seed: u64) -> Result<(PathCell, SplitSequence)> {
    mondrian_cell_with(params, x, &mut seeded(seed))
}

/// CDF of `Γ(2, λ)`: `1 - e^{-λu}(1 + λu)`.
pub fn gamma2_cdf(lambda: f64, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        1.0 - (-lambda * u).exp() * (1.0 + lambda * u)
    }
}
