//! Convergence-rate curves and the elongated-cell lower bound.

use crate::data::{builtin_g, generate_with, CovariateLaw, Dataset, NoiseModel, RegressionFunction};
use crate::error::{invalid, Result};
use crate::estimators::{
    cart_build, tree_predict, CartConfig, CartCost, FixedGrid, GridRegressor, KnnRegressor, Regressor,
};
use crate::geometry::{AxisBox, HyperRectangle};
use crate::vc_bounds::{elongation_mass_requirement, elongation_rmse_lower};

use super::stats::{fit_exponent, median};
use super::{
    raw_rows, replicate, CurvePoint, EstimatorKind, ExperimentConfig, ExperimentReport, ResultRow,
};

/// Largest dimension with a sup-norm lattice.
pub const MAX_LATTICE_DIM: usize = 6;

/// Regular lattice `{i / (M - 1)}^d` with `M = floor(10^(min(4, 2d) / d))`
/// points per coordinate, boundaries included.
pub fn evaluation_lattice(d: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 || d > MAX_LATTICE_DIM {
        return Err(invalid(format!(
            "sup-norm lattice is defined for 1 <= d <= {MAX_LATTICE_DIM}, got d = {d}"
        )));
    }
    let exponent = (4.min(2 * d)) as f64 / d as f64;
    let m = (10f64.powf(exponent) + 1e-9).floor() as usize;
    let axis: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
    let mut points = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Rate-optimal tuning with unit constants: `k = n^(2/(d+2)) log(n)^(d/(d+2))`
/// neighbours, `m = n^(2/(d+2))` points per CART leaf, or `n^(1/(d+2))`
/// grid cells per coordinate, each rounded and clamped to `1..=n`.
pub fn tuning(kind: EstimatorKind, n: usize, d: usize) -> usize {
    let (nf, df) = (n as f64, d as f64);
    let raw = match kind {
        EstimatorKind::Knn => nf.powf(2.0 / (df + 2.0)) * nf.ln().powf(df / (df + 2.0)),
        EstimatorKind::Cart => nf.powf(2.0 / (df + 2.0)),
        EstimatorKind::Grid => nf.powf(1.0 / (df + 2.0)),
    };
    (raw.round() as usize).clamp(1, n)
}

fn estimator_name(kind: EstimatorKind) -> &'static str {
    match kind {
        EstimatorKind::Knn => "knn",
        EstimatorKind::Cart => "cart",
        EstimatorKind::Grid => "grid",
    }
}

/// `(sup error over the lattice, error at the center)` of one fit.
fn errors(
    kind: EstimatorKind,
    ds: &Dataset,
    beta: f64,
    lattice: &[Vec<f64>],
    truth: &[f64],
    g: &RegressionFunction,
) -> Result<(f64, f64)> {
    let (n, d) = (ds.n(), ds.d());
    let t = tuning(kind, n, d);
    let predictor: Box<dyn Fn(&[f64]) -> Result<f64> + '_> = match kind {
        EstimatorKind::Knn => {
            let knn = KnnRegressor::fit(ds, t)?;
            Box::new(move |x| knn.predict(x))
        }
        EstimatorKind::Cart => {
            let tree = cart_build(ds, &CartConfig::new(t, beta), &CartCost)?;
            Box::new(move |x| tree_predict(&tree, ds, x))
        }
        EstimatorKind::Grid => {
            let grid = GridRegressor::fit(FixedGrid::uniform(d, t)?, ds)?;
            Box::new(move |x| grid.predict(x))
        }
    };
    let mut sup = 0.0f64;
    for (x, gx) in lattice.iter().zip(truth) {
        sup = sup.max((predictor(x)? - gx).abs());
    }
    let x0 = vec![0.5; d];
    Ok((sup, (predictor(&x0)? - g.eval(&x0)).abs()))
}

/// Median sup-norm and pointwise errors along a grid of sample sizes, and
/// the log-log slope of the sup-norm curve against `-1/(d+2)`.
///
/// All estimators see the same datasets.
pub fn rate_curve(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let d = cfg.d();
    let r = cfg.replicates();
    if r == 0 {
        return Err(invalid("need at least one replicate"));
    }
    if cfg.n.len() < 4 || cfg.n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("rate fits need a strictly increasing grid of at least 4 sample sizes"));
    }
    let lattice = evaluation_lattice(d)?;
    let g = builtin_g(cfg.g.as_deref().unwrap_or("sum_coords"), d)?;
    let truth: Vec<f64> = lattice.iter().map(|x| g.eval(x)).collect();
    let noise = NoiseModel::gaussian(cfg.sigma2.unwrap_or(0.25));
    let beta = cfg.beta.unwrap_or(2.0);
    let target = -1.0 / (d as f64 + 2.0);

    let mut curves = vec![Vec::new(); cfg.estimators.len()];
    let mut raw = Vec::new();
    for &n in &cfg.n {
        let stream = format!("rate/d={d}/n={n}");
        let per_rep = replicate(cfg.seed, &stream, r, |rng| {
            let ds = generate_with(&CovariateLaw::UniformCube, &g, &noise, n, rng)?;
            cfg.estimators
                .iter()
                .map(|&k| errors(k, &ds, beta, &lattice, &truth, &g))
                .collect::<Result<Vec<_>>>()
        })?;
        for (e, &kind) in cfg.estimators.iter().enumerate() {
            let sup: Vec<f64> = per_rep.iter().map(|v| v[e].0).collect();
            let point: Vec<f64> = per_rep.iter().map(|v| v[e].1).collect();
            curves[e].push(CurvePoint {
                n,
                median_sup_error: median(&sup)?,
                median_pointwise_error: median(&point)?,
            });
            raw.extend(raw_rows(&format!("{}/n={n}/sup", estimator_name(kind)), &sup));
        }
    }

    let mut rows = Vec::new();
    for (&kind, curve) in cfg.estimators.iter().zip(curves) {
        let name = format!("{}/d={d}", estimator_name(kind));
        let mut row = if curve.iter().all(|c| c.median_sup_error <= 1e-12) {
            // exact fits leave nothing to regress
            let hits = curve.len();
            ResultRow::exact(name, hits, curve.len(), 1.0)
        } else {
            let pairs: Vec<(f64, f64)> = curve.iter().map(|c| (c.n as f64, c.median_sup_error)).collect();
            let (slope, se) = fit_exponent(&pairs)?;
            ResultRow::slope(name, slope, se, target, 0.15)
        };
        row.curve = curve;
        rows.push(row);
    }
    Ok(ExperimentReport::new(cfg.clone(), rows, raw))
}

/// Sides of the corner cell `prod [0, h_k]` with volume `v` and
/// `diam^d / volume` as close to `gamma_bar` as the shape allows. Only the
/// first coordinate is stretched; a cube is used when `gamma_bar` is below
/// the cube's value `d^(d/2)`.
pub fn elongated_sides(d: usize, volume: f64, gamma_bar: f64) -> Result<Vec<f64>> {
    if d == 0 || !(volume > 0.0 && volume <= 1.0) {
        return Err(invalid("need d >= 1 and volume in (0, 1]"));
    }
    let cube = volume.powf(1.0 / d as f64);
    let cube_gamma = (d as f64).powf(d as f64 / 2.0);
    if gamma_bar <= cube_gamma || d == 1 {
        return Ok(vec![cube; d]);
    }
    // h_1 = r c, the others c, with r c · c^(d-1) = v: solve the ratio r by
    // bisection on diam^d / volume, which increases in r >= 1
    let df = d as f64;
    let gamma_of = |r: f64| {
        let c = (volume / r).powf(1.0 / df);
        let diam2 = (r * c).powi(2) + (df - 1.0) * c * c;
        diam2.powf(df / 2.0) / volume
    };
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while gamma_of(hi) < gamma_bar {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_of(mid) < gamma_bar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let c = (volume / r).powf(1.0 / df);
    let mut sides = vec![c; d];
    sides[0] = r * c;
    if sides[0] > 1.0 {
        return Err(invalid(format!(
            "gamma_bar = {gamma_bar} needs a side of {} > 1 at volume {volume}",
            sides[0]
        )));
    }
    Ok(sides)
}

/// RMSE at the corner `0` of the fixed elongated cells `prod [0, h_k]` with
/// `g = sum_coords`, uniform covariates and Gaussian noise.
///
/// The same datasets are used for every `gamma_bar`. The cube's RMSE is
/// compared with `sqrt(σ²/(n v) + (sum h_k / 2)²)`.
pub fn lower_bound_probe(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let d = cfg.d();
    let r = cfg.replicates();
    if r == 0 {
        return Err(invalid("need at least one replicate"));
    }
    let n = cfg.single_n()?;
    let sigma2 = cfg.sigma2.unwrap_or(1.0);
    let volume = cfg.cell_volume.unwrap_or(0.01);
    let need = elongation_mass_requirement(d);
    if (n as f64) * volume < need {
        return Err(invalid(format!(
            "n times the cell volume is {}, below the required {need}",
            n as f64 * volume
        )));
    }
    let mut bars = cfg.gamma_bars.clone();
    bars.sort_by(f64::total_cmp);
    let cells: Vec<HyperRectangle> = bars
        .iter()
        .map(|&gb| HyperRectangle::new(vec![0.0; d], elongated_sides(d, volume, gb)?))
        .collect::<Result<_>>()?;
    let g = builtin_g("sum_coords", d)?;
    let noise = NoiseModel::gaussian(sigma2);
    let sq_errors = replicate(cfg.seed, "elongated", r, |rng| {
        let ds = generate_with(&CovariateLaw::UniformCube, &g, &noise, n, rng)?;
        Ok(cells
            .iter()
            .map(|cell| {
                let (sum, count) = ds
                    .rows()
                    .zip(ds.responses())
                    .filter(|(x, _)| cell.contains(x))
                    .fold((0.0, 0usize), |(s, c), (_, y)| (s + y, c + 1));
                let estimate = if count == 0 { 0.0 } else { sum / count as f64 };
                estimate * estimate
            })
            .collect::<Vec<f64>>())
    })?;

    let mut rows = Vec::new();
    let mut rmse_by_bar = Vec::new();
    let mut raw = Vec::new();
    for (j, (cell, &gb)) in cells.iter().zip(&bars).enumerate() {
        let errs: Vec<f64> = sq_errors.iter().map(|v| v[j]).collect();
        let rmse = (errs.iter().sum::<f64>() / r as f64).sqrt();
        let actual = cell.gamma_ratio()?;
        let lower = elongation_rmse_lower(d, actual, sigma2, n as u64);
        let rate = (actual * sigma2 / n as f64).powf(1.0 / (d as f64 + 2.0));
        let label = format!("gamma_bar={gb}");
        rows.push(
            ResultRow::statistic_at_least(format!("rmse_lower_bound/{label}"), rmse, lower)
                .with_value("gamma_ratio", actual)
                .with_value("rmse_over_rate", rmse / rate),
        );
        rmse_by_bar.push((label.clone(), rmse));
        raw.extend(raw_rows(&format!("squared_error/{label}"), &errs));
    }
    rows.push(ResultRow::increasing("rmse_increasing", &rmse_by_bar));
    if let (Some(cube), Some(&(_, rmse))) = (cells.first(), rmse_by_bar.first()) {
        let bias = cube.sides().iter().sum::<f64>() / 2.0;
        let oracle = (sigma2 / (n as f64 * cube.volume()) + bias * bias).sqrt();
        rows.push(ResultRow::relative_error("cube_oracle", rmse, oracle, 0.2));
    }
    Ok(ExperimentReport::new(cfg.clone(), rows, raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    #[test]
    fn lattice_sizes() {
        assert_eq!(evaluation_lattice(1).unwrap().len(), 100);
        assert_eq!(evaluation_lattice(2).unwrap().len(), 10_000);
        assert_eq!(evaluation_lattice(3).unwrap().len(), 21usize.pow(3));
        assert!(evaluation_lattice(7).is_err());
        let l = evaluation_lattice(1).unwrap();
        assert_eq!((l[0][0], l[99][0]), (0.0, 1.0));
    }

    #[test]
    fn tuning_values() {
        assert_eq!(tuning(EstimatorKind::Cart, 1000, 1), 100);
        assert_eq!(tuning(EstimatorKind::Grid, 1000, 1), 10);
        assert_eq!(tuning(EstimatorKind::Cart, 10_000, 2), 100);
    }

    #[test]
    fn elongated_cells_hit_their_shape() {
        let cube = elongated_sides(2, 0.01, 1.0).unwrap();
        assert!((cube[0] - 0.1).abs() < 1e-15 && cube[0] == cube[1]);
        for gb in [10.0, 100.0] {
            let s = elongated_sides(2, 0.01, gb).unwrap();
            let cell = HyperRectangle::new(vec![0.0; 2], s).unwrap();
            assert!((cell.gamma_ratio().unwrap() - gb).abs() < 1e-9 * gb);
            assert!((cell.volume() - 0.01).abs() < 1e-15);
        }
        assert!(elongated_sides(2, 0.01, 1e6).is_err());
    }

    #[test]
    fn noiseless_constant_has_zero_error() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::RateCurve, 5).resolved();
        cfg.g = Some("constant_c=2.5".into());
        cfg.sigma2 = Some(0.0);
        cfg.n = vec![50, 100, 200, 400];
        cfg.replicates = Some(3);
        let report = rate_curve(&cfg).unwrap();
        assert!(report.passed());
        for row in &report.results {
            assert!(row.curve.iter().all(|c| c.median_sup_error <= 1e-12));
        }
    }

    #[test]
    fn mass_precondition_is_enforced() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::LowerBoundProbe, 5).resolved();
        cfg.n = vec![1000];
        assert!(lower_bound_probe(&cfg).is_err());
    }
}
