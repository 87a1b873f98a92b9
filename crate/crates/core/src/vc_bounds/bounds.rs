//! Closed-form deviation bounds.
//!
//! Every quantity involving `(n+1)^v` or `(2n+1)^v` is evaluated in log
//! space: with `v = 2d` and `n = 1e5` the linear form overflows quickly.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Constants shared by the regression error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    /// Sample size.
    pub n: u64,
    /// Confidence parameter.
    pub delta: f64,
    /// VC dimension of the class of cells.
    pub v: u32,
    /// Sub-Gaussian noise parameter.
    pub sigma2: f64,
    /// Minimal-mass constant.
    pub kappa: f64,
    /// Density value `f_X(x)` (or its floor `b`).
    pub density: f64,
    /// Lipschitz constant of the regression function.
    pub lipschitz: f64,
}

impl BoundSpec {
    pub fn new(n: u64, delta: f64, v: u32, sigma2: f64) -> Result<Self> {
        let spec = Self {
            n,
            delta,
            v,
            sigma2,
            kappa: 1.0,
            density: 1.0,
            lipschitz: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_mass(mut self, kappa: f64, density: f64) -> Self {
        self.kappa = kappa;
        self.density = density;
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.v == 0 {
            return Err(invalid("n and v must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.sigma2 >= 0.0) {
            return Err(invalid(format!("sigma2 must be >= 0, got {}", self.sigma2)));
        }
        Ok(())
    }

    fn require_delta_below(&self, cap: f64) -> Result<()> {
        self.validate()?;
        if self.delta >= cap {
            return Err(invalid(format!("delta must be < {cap}, got {}", self.delta)));
        }
        Ok(())
    }

    fn require_mass(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.density > 0.0) {
            return Err(invalid("kappa and density must be > 0"));
        }
        Ok(())
    }

    fn log_sauer(&self) -> f64 {
        log_sauer(self.n, self.v)
    }
}

/// `(n+1)^v`; exact while the result fits the mantissa.
pub fn sauer_bound(n: u64, v: u32) -> f64 {
    match i32::try_from(v) {
        Ok(v) => ((n as f64) + 1.0).powi(v),
        Err(_) => log_sauer(n, v).exp(),
    }
}

/// `v log(n+1)`.
pub fn log_sauer(n: u64, v: u32) -> f64 {
    f64::from(v) * ((n as f64) + 1.0).ln()
}

/// Exact Sauer–Shelah sum `sum_{i <= v} C(n, i)`, in log space.
pub fn log_sauer_binomial(n: u64, v: u32) -> f64 {
    let mut term = 0.0f64; // log C(n, 0)
    let mut acc = 0.0f64;
    for i in 1..=u64::from(v).min(n) {
        term += ((n - i + 1) as f64).ln() - (i as f64).ln();
        acc = log_add_exp(acc, term);
    }
    acc
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Threshold `sqrt(2 σ² log(S/δ))` for the normalised noise supremum over
/// a class with `exp(log_shatter)` realised patterns.
pub fn sup_noise_threshold(sigma2: f64, log_shatter: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) || !(sigma2 >= 0.0) || !(log_shatter >= 0.0) {
        return Err(invalid("need sigma2 >= 0, log_shatter >= 0 and delta in (0,1)"));
    }
    Ok((2.0 * sigma2 * (log_shatter - delta.ln())).sqrt())
}

/// Variance envelope `sqrt(2 σ² log((n+1)^v/δ) / local_count)`.
pub fn variance_term(spec: &BoundSpec, local_count: u64) -> Result<f64> {
    spec.validate()?;
    if local_count == 0 {
        return Err(Error::EmptyCell);
    }
    Ok((2.0 * spec.sigma2 * (spec.log_sauer() - spec.delta.ln()) / local_count as f64).sqrt())
}

/// Pointwise error bound with the realised local count:
/// variance envelope plus `L(V) diam(V)`.
pub fn pointwise_bound(
    spec: &BoundSpec,
    local_count: u64,
    local_lipschitz: f64,
    diameter: f64,
) -> Result<f64> {
    spec.require_delta_below(0.5)?;
    Ok(variance_term(spec, local_count)? + local_lipschitz * diameter)
}

/// `8 log(4 (2n+1)^v / δ)`: the empirical or true mass `n P(V(x))` a
/// (δ,n)-large local map must reach.
pub fn large_sample_threshold(n: u64, v: u32, delta: f64) -> Result<f64> {
    if n == 0 || v == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("need n >= 1, v >= 1 and delta in (0,1)"));
    }
    Ok(8.0 * (4f64.ln() + f64::from(v) * (2.0 * n as f64 + 1.0).ln() - delta.ln()))
}

/// Minimal leaf size `4 log(4 (2n+1)^(2d) / δ)` required by the CART-like
/// deviation bound.
pub fn cart_min_leaf(n: u64, d: usize, delta: f64) -> Result<f64> {
    let large = large_sample_threshold(n, 2 * d as u32, delta)?;
    Ok(large / 2.0)
}

/// Minimal neighbour count `8 log(4 (2n+1)^(d+1) / δ)` for the k-NN bound.
pub fn knn_min_k(n: u64, d: usize, delta: f64) -> Result<f64> {
    large_sample_threshold(n, d as u32 + 1, delta)
}

/// Volume-based bound under minimal mass:
/// `sqrt(3 σ² log((n+1)^v/δ) / (n κ f λ(V))) + L diam(V)`.
pub fn volume_bound(spec: &BoundSpec, cell_volume: f64, diameter: f64) -> Result<f64> {
    spec.require_delta_below(1.0 / 3.0)?;
    spec.require_mass()?;
    if !(cell_volume > 0.0) {
        return Err(Error::DegenerateSet(cell_volume));
    }
    let denom = spec.n as f64 * spec.kappa * spec.density * cell_volume;
    let var = (3.0 * spec.sigma2 * (spec.log_sauer() - spec.delta.ln()) / denom).sqrt();
    Ok(var + spec.lipschitz * diameter)
}

/// Rate-optimal cell volume `(log((n+1)^v/δ)/n)^(d/(d+2))`, constants fixed to 1.
pub fn optimal_cell_volume(n: u64, v: u32, delta: f64, d: usize) -> Result<f64> {
    if n == 0 || d == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("need n >= 1, d >= 1 and delta in (0,1)"));
    }
    let d = d as f64;
    Ok(((log_sauer(n, v) - delta.ln()) / n as f64).powf(d / (d + 2.0)))
}

/// k-NN bound: `sqrt(2σ² log((n+1)^(d+1)/δ)/k) + 2 (2k/(n κ f))^(1/d) L`.
pub fn knn_bound(spec: &BoundSpec, d: usize, k: u64) -> Result<f64> {
    spec.require_delta_below(1.0 / 3.0)?;
    spec.require_mass()?;
    if k == 0 || d == 0 {
        return Err(invalid("need k >= 1 and d >= 1"));
    }
    let log_s = log_sauer(spec.n, d as u32 + 1);
    let var = (2.0 * spec.sigma2 * (log_s - spec.delta.ln()) / k as f64).sqrt();
    let radius =
        (2.0 * k as f64 / (spec.n as f64 * spec.kappa * spec.density)).powf(1.0 / d as f64);
    Ok(var + 2.0 * radius * spec.lipschitz)
}

/// CART-like bound:
/// `sqrt(2σ² log((n+1)^(2d)/δ)/m) + L β √d (5m/(n f κ))^(1/d)`.
pub fn cart_bound(spec: &BoundSpec, d: usize, m: u64, beta: f64) -> Result<f64> {
    spec.require_delta_below(1.0 / 3.0)?;
    spec.require_mass()?;
    if m == 0 || d == 0 || !(beta >= 2.0) {
        return Err(invalid("need m >= 1, d >= 1 and beta >= 2"));
    }
    let log_s = log_sauer(spec.n, 2 * d as u32);
    let var = (2.0 * spec.sigma2 * (log_s - spec.delta.ln()) / m as f64).sqrt();
    let side = (5.0 * m as f64 / (spec.n as f64 * spec.density * spec.kappa))
        .powf(1.0 / d as f64);
    Ok(var + spec.lipschitz * beta * (d as f64).sqrt() * side)
}

/// Lower and upper envelopes for an empirical mass `P_n(A)` given `P(A) = p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBounds {
    /// Normalised Vapnik lower bound, uniform over the class.
    pub vapnik_lower: f64,
    /// Multiplicative Chernoff lower bound (constant 2).
    pub chernoff_lower: f64,
    /// Multiplicative Chernoff upper bound (constant 3).
    pub chernoff_upper: f64,
}

/// `shatter_log` is `log S_A(2n)` for the Vapnik form. Lower bounds are
/// clamped at zero.
pub fn empirical_mass_bounds(n: u64, p: f64, delta: f64, shatter_log: f64) -> Result<MassBounds> {
    if n == 0 || !(p > 0.0 && p <= 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("need n >= 1, p in (0,1] and delta in (0,1)"));
    }
    let np = n as f64 * p;
    let vapnik = 1.0 - (4.0 * (shatter_log + (4.0 / delta).ln()) / np).sqrt();
    let log_inv = -delta.ln();
    Ok(MassBounds {
        vapnik_lower: (p * vapnik).max(0.0),
        chernoff_lower: (p * (1.0 - (2.0 * log_inv / np).sqrt())).max(0.0),
        chernoff_upper: p * (1.0 + (3.0 * log_inv / np).sqrt()),
    })
}

/// Upper bound on the true mass from the empirical one:
/// `P(A) <= 4/n log(4 S_A(2n)/δ) + 2 P_n(A)`.
pub fn vapnik_mass_upper(n: u64, empirical: f64, delta: f64, shatter_log: f64) -> Result<f64> {
    if n == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("need n >= 1 and delta in (0,1)"));
    }
    Ok(4.0 / n as f64 * ((4.0 / delta).ln() + shatter_log) + 2.0 * empirical)
}

/// Existence constant of the elongated-cell lower bound,
/// `sqrt(1 + 2/d) (d/2)^(1/(d+2)) (1/(2^d sqrt 72))^(d/(d+2))`.
pub fn elongation_constant(d: usize) -> f64 {
    let d = d as f64;
    (1.0 + 2.0 / d).sqrt()
        * (d / 2.0).powf(1.0 / (d + 2.0))
        * (1.0 / (2f64.powf(d) * 72f64.sqrt())).powf(d / (d + 2.0))
}

/// RMSE lower bound `C_d (γ̄ σ² / n)^(1/(d+2))` at the corner of an
/// elongated cell.
pub fn elongation_rmse_lower(d: usize, gamma_bar: f64, sigma2: f64, n: u64) -> f64 {
    elongation_constant(d) * (gamma_bar * sigma2 / n as f64).powf(1.0 / (d as f64 + 2.0))
}

/// Mass precondition `n prod h_k >= 2^(d+4) log 2` of the elongated-cell bound.
pub fn elongation_mass_requirement(d: usize) -> f64 {
    2f64.powi(d as i32 + 4) * 2f64.ln()
}

/// A tail bound `P(statistic beyond threshold) <= probability`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub threshold: f64,
    pub probability: f64,
}

fn check_tree(d: usize, splits: usize) -> Result<()> {
    if d == 0 || splits == 0 {
        return Err(invalid("need d >= 1 and N >= 1"));
    }
    Ok(())
}

/// Uniform tree: `P(diam >= √d e^(-N/d + Nβ)) <= d e^(-N d β²/4)`, `β >= 0`.
pub fn uniform_diameter_upper(d: usize, splits: usize, beta: f64) -> Result<TailBound> {
    check_tree(d, splits)?;
    if !(beta >= 0.0) {
        return Err(invalid(format!("beta must be >= 0, got {beta}")));
    }
    let (d_f, n_f) = (d as f64, splits as f64);
    Ok(TailBound {
        threshold: d_f.sqrt() * (-n_f / d_f + n_f * beta).exp(),
        probability: d_f * (-n_f * d_f * beta * beta / 4.0).exp(),
    })
}

/// Uniform tree: `P(diam <= √d e^(-N/d - Nβ)) <= d e^(-N d β²/8)`, `β in (0, 2/d)`.
pub fn uniform_diameter_lower(d: usize, splits: usize, beta: f64) -> Result<TailBound> {
    check_tree(d, splits)?;
    let (d_f, n_f) = (d as f64, splits as f64);
    if !(beta > 0.0 && beta < 2.0 / d_f) {
        return Err(invalid(format!("beta must lie in (0, 2/d), got {beta}")));
    }
    Ok(TailBound {
        threshold: d_f.sqrt() * (-n_f / d_f - n_f * beta).exp(),
        probability: d_f * (-n_f * d_f * beta * beta / 8.0).exp(),
    })
}

fn volume_tail(splits: usize, alpha: f64) -> TailBound {
    let n_f = splits as f64;
    TailBound {
        threshold: (-alpha * n_f).exp(),
        probability: (n_f * (alpha.ln() + 1.0 - alpha)).exp(),
    }
}

/// Uniform tree: `P(λ(V) <= e^(-αN)) <= (α e^(1-α))^N`, `α > 1`.
pub fn uniform_volume_lower(splits: usize, alpha: f64) -> Result<TailBound> {
    check_tree(1, splits)?;
    if !(alpha > 1.0) {
        return Err(invalid(format!("alpha must be > 1, got {alpha}")));
    }
    Ok(volume_tail(splits, alpha))
}

/// Uniform tree: `P(λ(V) >= e^(-αN)) <= (α e^(1-α))^N`, `α in (0,1)`.
pub fn uniform_volume_upper(splits: usize, alpha: f64) -> Result<TailBound> {
    check_tree(1, splits)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(volume_tail(splits, alpha))
}

fn centered_tail(d: usize, splits: usize, alpha: f64) -> TailBound {
    let (d_f, n_f) = (d as f64, splits as f64);
    let beta = (d_f - 1.0) * alpha / (1.0 - alpha);
    let log_p = d_f.ln() + n_f * (1.0 - (1.0 - beta) / d_f).ln() - alpha * n_f * beta.ln();
    TailBound {
        threshold: d_f.sqrt() * 2f64.powf(-alpha * n_f),
        probability: log_p.exp(),
    }
}

/// Centered tree: `P(diam >= √d 2^(-αN)) <= d (1 - (1-β)/d)^N β^(-αN)`
/// with `β = (d-1)α/(1-α)`, `α in (0, 1/d)`, `d >= 2`.
pub fn centered_diameter_upper(d: usize, splits: usize, alpha: f64) -> Result<TailBound> {
    check_tree(d, splits)?;
    if d < 2 || !(alpha > 0.0 && alpha < 1.0 / d as f64) {
        return Err(invalid(format!("need d >= 2 and alpha in (0, 1/d), got d={d}, alpha={alpha}")));
    }
    Ok(centered_tail(d, splits, alpha))
}

/// Centered tree: `P(diam <= √d 2^(-αN))`, same bound, `α in (1/d, 1)`.
pub fn centered_diameter_lower(d: usize, splits: usize, alpha: f64) -> Result<TailBound> {
    check_tree(d, splits)?;
    if d < 2 || !(alpha > 1.0 / d as f64 && alpha < 1.0) {
        return Err(invalid(format!("need d >= 2 and alpha in (1/d, 1), got d={d}, alpha={alpha}")));
    }
    Ok(centered_tail(d, splits, alpha))
}

/// Uniform trees violate shape regularity: `P(h_+/h_- >= e^sqrt(N/d)) >= 1/11`.
pub fn uniform_non_sr(d: usize, splits: usize) -> Result<TailBound> {
    if d < 2 || splits < d {
        return Err(invalid(format!("need d >= 2 and N >= d, got d={d}, N={splits}")));
    }
    Ok(TailBound {
        threshold: (splits as f64 / d as f64).sqrt().exp(),
        probability: 1.0 / 11.0,
    })
}

/// Centered trees violate shape regularity: `P(h_+/h_- >= 2^sqrt(N/d)) >= 1/14`.
pub fn centered_non_sr(d: usize, splits: usize) -> Result<TailBound> {
    if d < 2 || splits < d {
        return Err(invalid(format!("need d >= 2 and N >= d, got d={d}, N={splits}")));
    }
    Ok(TailBound {
        threshold: 2f64.powf((splits as f64 / d as f64).sqrt()),
        probability: 1.0 / 14.0,
    })
}

/// Largest δ admitted by the Mondrian shape bound: `1 - (1 - e^-1)^d`.
pub fn mondrian_max_delta(d: usize) -> f64 {
    1.0 - (1.0 - (-1f64).exp()).powi(d as i32)
}

/// Mondrian cells: `P(h_+/h_- <= 5d log(δ/d)/log(1-δ)) >= 1 - 2δ`.
pub fn mondrian_ratio_bound(d: usize, delta: f64) -> Result<TailBound> {
    if d == 0 {
        return Err(invalid("d must be >= 1"));
    }
    let cap = mondrian_max_delta(d);
    if !(delta > 0.0 && delta <= cap) {
        return Err(invalid(format!("delta must lie in (0, {cap}], got {delta}")));
    }
    let d_f = d as f64;
    Ok(TailBound {
        threshold: 5.0 * d_f * (delta / d_f).ln() / (1.0 - delta).ln(),
        probability: 1.0 - 2.0 * delta,
    })
}
