//! Purely random tree experiments.

use rand::distr::{Distribution, Open01};
use rand::Rng;

use crate::error::{invalid, Result};
use crate::geometry::AxisBox;
use crate::random_trees::{
    gamma2_cdf, grow_path_with, mondrian_cell_with, volume_invariance_check, MondrianParams, TreeKind,
};
use crate::vc_bounds::{
    centered_diameter_lower, centered_diameter_upper, centered_non_sr, mondrian_ratio_bound,
    uniform_diameter_lower, uniform_diameter_upper, uniform_non_sr, uniform_volume_lower,
    uniform_volume_upper,
};

use super::stats::{ks_one_sample, ks_two_sample, median};
use super::{raw_rows, replicate, EventSpec, ExperimentConfig, ExperimentReport, ResultRow, TreeEvent};

fn kind_name(kind: TreeKind) -> &'static str {
    match kind {
        TreeKind::Uniform => "uniform",
        TreeKind::Centered => "centered",
    }
}

fn center(d: usize) -> Vec<f64> {
    vec![0.5; d]
}

/// Volume identity on random paths, and the law of the volume.
///
/// Each replicate draws `N` uniformly in `0..=splits` and a uniform query
/// point. The law rows grow `min(splits, 20)` uniform splits around a
/// uniform point and compare the log-volume with two references: the
/// product of as many uniforms, and the product of their square roots.
/// The piece kept at each split contains `x`, so it is length-biased with
/// density `2s`; the second reference is the exact law.
pub fn volume_invariance(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = cfg.frequency_replicates()?;
    let max_splits = cfg.splits.unwrap_or(50);
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for kind in [TreeKind::Uniform, TreeKind::Centered] {
        for &d in &cfg.dims {
            let name = format!("invariance/{}/d={d}", kind_name(kind));
            let ok = replicate(cfg.seed, &name, r, |rng| {
                let n = rng.random_range(0..=max_splits);
                let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let (cell, seq) = grow_path_with(kind, &x, n, rng)?;
                Ok(volume_invariance_check(&cell, &seq))
            })?;
            let hits = ok.iter().filter(|&&b| b).count();
            rows.push(ResultRow::exact(name, hits, r, 1.0));
        }
    }
    let n = max_splits.min(20);
    let d = cfg.dims.iter().copied().max().unwrap_or(2);
    let vols = replicate(cfg.seed, "volume_law/tree", r, |rng| {
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let (cell, _) = grow_path_with(TreeKind::Uniform, &x, n, rng)?;
        Ok(cell.volume().ln())
    })?;
    let log_uniforms = replicate(cfg.seed, "volume_law/product", r, |rng| {
        Ok((0..n).map(|_| Open01.sample(rng)).map(f64::ln).sum::<f64>())
    })?;
    let halved: Vec<f64> = log_uniforms.iter().map(|l| l / 2.0).collect();
    for (name, reference) in [("volume_law_ks", &log_uniforms), ("volume_law_length_biased_ks", &halved)] {
        rows.push(
            ResultRow::statistic_below(name, ks_two_sample(&vols, reference), 0.03)
                .with_value("splits", n as f64)
                .with_value("d", d as f64),
        );
    }
    raw.extend(raw_rows("volume_law/log_volume", &vols));
    Ok(ExperimentReport::new(cfg.clone(), rows, raw))
}

fn event_name(e: TreeEvent) -> &'static str {
    match e {
        TreeEvent::UniformDiameterUpper => "uniform_diameter_upper",
        TreeEvent::UniformDiameterLower => "uniform_diameter_lower",
        TreeEvent::UniformVolumeLower => "uniform_volume_lower",
        TreeEvent::UniformVolumeUpper => "uniform_volume_upper",
        TreeEvent::CenteredDiameterUpper => "centered_diameter_upper",
        TreeEvent::CenteredDiameterLower => "centered_diameter_lower",
        TreeEvent::CenteredVolume => "centered_volume",
    }
}

/// Frequencies of the diameter and volume deviation events against their
/// tail bounds, at the cube's center.
pub fn event_frequency(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = cfg.frequency_replicates()?;
    let d = cfg.d();
    let n = cfg.splits.unwrap_or(50);
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for &EventSpec { event, param } in &cfg.events {
        let name = event_name(event);
        let bound = match event {
            TreeEvent::UniformDiameterUpper => Some(uniform_diameter_upper(d, n, param)?),
            TreeEvent::UniformDiameterLower => Some(uniform_diameter_lower(d, n, param)?),
            TreeEvent::UniformVolumeLower => Some(uniform_volume_lower(n, param)?),
            TreeEvent::UniformVolumeUpper => Some(uniform_volume_upper(n, param)?),
            TreeEvent::CenteredDiameterUpper => Some(centered_diameter_upper(d, n, param)?),
            TreeEvent::CenteredDiameterLower => Some(centered_diameter_lower(d, n, param)?),
            TreeEvent::CenteredVolume => {
                if !(param > 0.0) {
                    return Err(invalid(format!("alpha must be positive, got {param}")));
                }
                None
            }
        };
        let threshold = match bound {
            Some(b) => b.threshold,
            None => (-param * n as f64).exp(),
        };
        let stats = replicate(cfg.seed, name, r, |rng| {
            let (cell, _) = grow_path_with(event.tree(), &center(d), n, rng)?;
            Ok(match event {
                TreeEvent::UniformDiameterUpper
                | TreeEvent::UniformDiameterLower
                | TreeEvent::CenteredDiameterUpper
                | TreeEvent::CenteredDiameterLower => cell.diameter(),
                _ => cell.volume(),
            })
        })?;
        let hit = |s: f64| match event {
            TreeEvent::UniformDiameterUpper | TreeEvent::CenteredDiameterUpper => s >= threshold,
            TreeEvent::UniformVolumeUpper => s >= threshold,
            _ => s <= threshold,
        };
        let hits = stats.iter().filter(|&&s| hit(s)).count();
        let row = match bound {
            Some(b) => ResultRow::at_most(name, hits, r, b.probability),
            None => {
                let expected = if 2f64.powi(-(n as i32)) <= threshold { 1.0 } else { 0.0 };
                ResultRow::exact(name, hits, r, expected)
            }
        };
        rows.push(row.with_value("param", param).with_value("threshold", threshold));
        raw.extend(raw_rows(name, &stats));
    }
    Ok(ExperimentReport::new(cfg.clone(), rows, raw))
}

/// Frequency of strongly elongated cells in uniform or centered trees.
pub fn non_sr_frequency(cfg: &ExperimentConfig, kind: TreeKind) -> Result<ExperimentReport> {
    let r = cfg.frequency_replicates()?;
    let d = cfg.d();
    let n = cfg.splits.unwrap_or(50);
    if d < 2 {
        return Err(invalid("shape ratios are identically 1 in d = 1; use d >= 2"));
    }
    let bound = match kind {
        TreeKind::Uniform => uniform_non_sr(d, n)?,
        TreeKind::Centered => centered_non_sr(d, n)?,
    };
    let name = format!("{}_non_sr", kind_name(kind));
    let ratios = replicate(cfg.seed, &name, r, |rng| {
        let (cell, _) = grow_path_with(kind, &center(d), n, rng)?;
        cell.shape_ratio()
    })?;
    let hits = ratios.iter().filter(|&&q| q >= bound.threshold).count();
    let row = ResultRow::at_least(name.clone(), hits, r, bound.probability)
        .with_value("threshold", bound.threshold);
    Ok(ExperimentReport::new(cfg.clone(), vec![row], raw_rows(&name, &ratios)))
}

fn mondrian_ratios(cfg: &ExperimentConfig, params: &MondrianParams, name: &str) -> Result<Vec<f64>> {
    let x = center(params.d);
    replicate(cfg.seed, name, cfg.replicates(), |rng| {
        let (cell, _) = mondrian_cell_with(params, &x, rng)?;
        cell.shape_ratio()
    })
}

/// Shape ratio of Mondrian cells against its high-probability bound, plus
/// a check that the ratio law does not drift with the lifetime.
pub fn mondrian_ratio(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = cfg.frequency_replicates()?;
    let d = cfg.d();
    let lifetime = cfg.lifetime.unwrap_or(10.0);
    let delta = cfg.delta.unwrap_or(0.1);
    let bound = mondrian_ratio_bound(d, delta)?;
    let params = MondrianParams::new(lifetime, d)?;
    let ratios = mondrian_ratios(cfg, &params, "mondrian")?;
    let hits = ratios.iter().filter(|&&q| q <= bound.threshold).count();
    let mut rows = vec![ResultRow::at_least("mondrian_ratio", hits, r, bound.probability)
        .with_value("threshold", bound.threshold)];

    let doubled = MondrianParams::new(2.0 * lifetime, d)?;
    let ratios2 = mondrian_ratios(cfg, &doubled, "mondrian/doubled")?;
    let (m1, m2) = (median(&ratios)?, median(&ratios2)?);
    rows.push(
        ResultRow::statistic_below("median_ratio_drift", m1.max(m2) / m1.min(m2), 2.0)
            .with_value("median", m1)
            .with_value("median_doubled_lifetime", m2),
    );
    Ok(ExperimentReport::new(cfg.clone(), rows, raw_rows("mondrian", &ratios)))
}

/// Kolmogorov–Smirnov distance between the first side length of Mondrian
/// cells at the cube's center and the law of `min(X, 1)`, `X ~ Γ(2, λ)`.
pub fn mondrian_side_ks(lifetime: f64, d: usize, replicates: usize, seed: u64) -> Result<f64> {
    let params = MondrianParams::new(lifetime, d)?;
    let x = center(d);
    let sides = replicate(seed, "mondrian/sides", replicates, |rng| {
        Ok(mondrian_cell_with(&params, &x, rng)?.0.side(0))
    })?;
    Ok(ks_one_sample(&sides, |u| if u >= 1.0 { 1.0 } else { gamma2_cdf(lifetime, u) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    #[test]
    fn centered_volume_event_is_deterministic() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::EventFrequency, 1);
        cfg.replicates = Some(100);
        cfg.splits = Some(10);
        cfg.d = Some(2);
        cfg.events = vec![
            EventSpec { event: TreeEvent::CenteredVolume, param: 0.5 },
            EventSpec { event: TreeEvent::CenteredVolume, param: 0.8 },
        ];
        let report = event_frequency(&cfg).unwrap();
        assert_eq!(report.results[0].frequency, Some(1.0));
        assert_eq!(report.results[1].frequency, Some(0.0));
        assert!(report.passed());
    }

    #[test]
    fn parameters_out_of_range_are_rejected() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::EventFrequency, 1).resolved();
        cfg.events = vec![EventSpec { event: TreeEvent::UniformVolumeLower, param: 0.5 }];
        assert!(event_frequency(&cfg).is_err());
        let mut cfg = ExperimentConfig::new(ExperimentKind::UniformNonSr, 1).resolved();
        cfg.d = Some(1);
        assert!(non_sr_frequency(&cfg, TreeKind::Uniform).is_err());
        cfg.d = Some(2);
        cfg.replicates = Some(10);
        assert!(non_sr_frequency(&cfg, TreeKind::Uniform).is_err());
    }
}
