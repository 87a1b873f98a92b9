//! Exceedance frequencies of the uniform noise envelope and of the
//! pointwise error bound.

use std::collections::HashSet;

use rand_distr::{Distribution, StandardNormal};

use crate::data::{builtin_g, generate_with, CovariateLaw, NoiseModel};
use crate::error::{invalid, Result};
use crate::estimators::{FixedGrid, GridRegressor, Regressor};
use crate::geometry::AxisBox;
use crate::vc_bounds::{pointwise_bound, sup_noise_threshold, BoundSpec, FiniteSetClass};

use super::rates::evaluation_lattice;
use super::{raw_rows, replicate, ExperimentConfig, ExperimentReport, ResultRow};

/// `class_size` rectangles spread evenly over the grid-anchored boxes with
/// corners in `{0, 1/4, 1/2, 3/4, 1}^d`.
pub fn anchored_rectangles(d: usize, class_size: usize) -> Result<FiniteSetClass> {
    let all = FiniteSetClass::rectangles(&[0.0, 0.25, 0.5, 0.75, 1.0], d);
    if class_size == 0 || class_size > all.len() {
        return Err(invalid(format!(
            "class size must lie in 1..={} for d = {d}, got {class_size}",
            all.len()
        )));
    }
    let stride = all.len() / class_size;
    let sets = all.sets().iter().step_by(stride).take(class_size).cloned().collect();
    FiniteSetClass::new(d, sets)
}

/// Normalised noise supremum `sup_A Σ ε_i 1_A(X_i) / sqrt(Σ 1_A(X_j))` over a
/// finite rectangle class, against `sqrt(2σ² log(S/δ))` with `S` the number
/// of distinct nonempty patterns realised by the sample.
pub fn sup_envelope(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = cfg.frequency_replicates()?;
    let d = cfg.d();
    let n = cfg.single_n()?;
    let sigma2 = cfg.sigma2.unwrap_or(1.0);
    let delta = cfg.delta.unwrap_or(0.05);
    let class = anchored_rectangles(d, cfg.class_size.unwrap_or(50))?;
    let law = CovariateLaw::UniformCube;
    let sigma = sigma2.sqrt();
    let excess = replicate(cfg.seed, "sup_envelope", r, |rng| {
        let mut x = vec![0.0; n * d];
        for row in x.chunks_exact_mut(d) {
            law.sample_into(rng, row);
        }
        let eps: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            })
            .collect();
        let mut patterns = HashSet::new();
        let mut sup = f64::NEG_INFINITY;
        for set in class.sets() {
            let members: Vec<usize> = (0..n).filter(|&i| set.contains(&x[i * d..(i + 1) * d])).collect();
            if members.is_empty() {
                continue;
            }
            let s: f64 = members.iter().map(|&i| eps[i]).sum();
            sup = sup.max(s / (members.len() as f64).sqrt());
            patterns.insert(members);
        }
        if patterns.is_empty() {
            return Ok(f64::NEG_INFINITY);
        }
        let threshold = sup_noise_threshold(sigma2, (patterns.len() as f64).ln(), delta)?;
        Ok(sup - threshold)
    })?;
    let hits = excess.iter().filter(|&&e| e > 0.0).count();
    let row = ResultRow::at_most("sup_envelope", hits, r, delta)
        .with_value("class_size", class.len() as f64);
    Ok(ExperimentReport::new(cfg.clone(), vec![row], raw_rows("sup_minus_threshold", &excess)))
}

/// Pointwise error of a fixed-grid estimator against the bound
/// `sqrt(2σ² log((n+1)^v/δ) / nP_n(V(x))) + L(V) diam(V)` with `v = 2d`,
/// checked at every lattice point with a nonempty cell.
pub fn pointwise_envelope(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = cfg.frequency_replicates()?;
    let d = cfg.d();
    let n = cfg.single_n()?;
    let sigma2 = cfg.sigma2.unwrap_or(0.25);
    let delta = cfg.delta.unwrap_or(0.05);
    let g = builtin_g(cfg.g.as_deref().unwrap_or("sum_coords"), d)?;
    let grid = FixedGrid::uniform(d, cfg.grid_cells.unwrap_or(10))?;
    let lattice = evaluation_lattice(d)?;
    let spec = BoundSpec::new(n as u64, delta, 2 * d as u32, sigma2)?;
    let noise = NoiseModel::gaussian(sigma2);
    let worst = replicate(cfg.seed, "pointwise_envelope", r, |rng| {
        let ds = generate_with(&CovariateLaw::UniformCube, &g, &noise, n, rng)?;
        let reg = GridRegressor::fit(grid.clone(), &ds)?;
        let mut worst = f64::NEG_INFINITY;
        for x in &lattice {
            let count = reg.count_at(x)?;
            if count == 0 {
                continue;
            }
            let cell = grid.cell_of(x)?;
            let bound = pointwise_bound(&spec, count as u64, g.local_lipschitz(&cell), cell.diameter())?;
            worst = worst.max((reg.predict(x)? - g.eval(x)).abs() - bound);
        }
        Ok(worst)
    })?;
    let hits = worst.iter().filter(|&&w| w > 0.0).count();
    let row = ResultRow::at_most("pointwise_envelope", hits, r, 2.0 * delta);
    Ok(ExperimentReport::new(cfg.clone(), vec![row], raw_rows("error_minus_bound", &worst)))
}
