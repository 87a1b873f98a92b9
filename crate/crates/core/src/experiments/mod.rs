//! Monte Carlo harness.
//!
//! Each experiment turns a probabilistic statement into a frequency over
//! seeded replicates (or a rate statement into a log-log slope) and attaches
//! a verdict under a named rule. Replicate `i` of stream `name` always draws
//! from `stream_rng(seed, name, i)`, and results are collected in replicate
//! order, so reports do not depend on the number of worker threads.

mod envelope;
mod rates;
mod stats;
mod trees;

pub use envelope::{anchored_rectangles, pointwise_envelope, sup_envelope};
pub use rates::{elongated_sides, evaluation_lattice, lower_bound_probe, rate_curve, tuning, MAX_LATTICE_DIM};
pub use stats::{binomial_se, fit_exponent, ks_one_sample, ks_two_sample, median};
pub use trees::{event_frequency, mondrian_ratio, mondrian_side_ks, non_sr_frequency, volume_invariance};

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::random_trees::TreeKind;
use crate::rng::{stream_rng, StreamRng};

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    VolumeInvariance,
    EventFrequency,
    UniformNonSr,
    CenteredNonSr,
    MondrianRatio,
    RateCurve,
    LowerBoundProbe,
    SupEnvelope,
    PointwiseEnvelope,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::VolumeInvariance,
        Self::EventFrequency,
        Self::UniformNonSr,
        Self::CenteredNonSr,
        Self::MondrianRatio,
        Self::RateCurve,
        Self::LowerBoundProbe,
        Self::SupEnvelope,
        Self::PointwiseEnvelope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::VolumeInvariance => "volume_invariance",
            Self::EventFrequency => "event_frequency",
            Self::UniformNonSr => "uniform_non_sr",
            Self::CenteredNonSr => "centered_non_sr",
            Self::MondrianRatio => "mondrian_ratio",
            Self::RateCurve => "rate_curve",
            Self::LowerBoundProbe => "lower_bound_probe",
            Self::SupEnvelope => "sup_envelope",
            Self::PointwiseEnvelope => "pointwise_envelope",
        }
    }

    /// Resolves a name or a short alias. Event aliases also select the
    /// events they cover.
    pub fn parse_with_events(s: &str) -> Result<(Self, Vec<TreeEvent>)> {
        use TreeEvent::*;
        let hit = |k| Ok((k, Vec::new()));
        match s {
            "prop6_1" => hit(Self::VolumeInvariance),
            "prop6_2" => Ok((Self::EventFrequency, vec![UniformDiameterUpper, UniformDiameterLower])),
            "prop6_3" => Ok((Self::EventFrequency, vec![UniformVolumeLower, UniformVolumeUpper])),
            "prop6_5" => Ok((Self::EventFrequency, vec![CenteredDiameterUpper, CenteredDiameterLower])),
            "prop6_4" => hit(Self::UniformNonSr),
            "prop6_6" => hit(Self::CenteredNonSr),
            "prop6_7" => hit(Self::MondrianRatio),
            "rates" => hit(Self::RateCurve),
            "prop4_2" => hit(Self::LowerBoundProbe),
            "thm3_1" => hit(Self::SupEnvelope),
            "thm3_2" => hit(Self::PointwiseEnvelope),
            other => Self::ALL
                .into_iter()
                .find(|k| k.name() == other)
                .map(|k| (k, Vec::new()))
                .ok_or_else(|| invalid(format!("unknown experiment `{other}`"))),
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_events(s).map(|(k, _)| k)
    }
}

/// Deviation events of purely random trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeEvent {
    /// `diam >= √d e^(-N/d + Nβ)`.
    UniformDiameterUpper,
    /// `diam <= √d e^(-N/d - Nβ)`.
    UniformDiameterLower,
    /// `volume <= e^(-αN)`, `α > 1`.
    UniformVolumeLower,
    /// `volume >= e^(-αN)`, `α < 1`.
    UniformVolumeUpper,
    /// `diam >= √d 2^(-αN)`.
    CenteredDiameterUpper,
    /// `diam <= √d 2^(-αN)`.
    CenteredDiameterLower,
    /// `volume <= e^(-αN)`; deterministic since the volume is `2^-N`.
    CenteredVolume,
}

impl TreeEvent {
    pub const ALL: [TreeEvent; 7] = [
        Self::UniformDiameterUpper,
        Self::UniformDiameterLower,
        Self::UniformVolumeLower,
        Self::UniformVolumeUpper,
        Self::CenteredDiameterUpper,
        Self::CenteredDiameterLower,
        Self::CenteredVolume,
    ];

    pub fn tree(self) -> TreeKind {
        match self {
            Self::UniformDiameterUpper
            | Self::UniformDiameterLower
            | Self::UniformVolumeLower
            | Self::UniformVolumeUpper => TreeKind::Uniform,
            _ => TreeKind::Centered,
        }
    }

    /// Default β or α.
    pub fn default_param(self) -> f64 {
        match self {
            Self::UniformDiameterUpper | Self::UniformDiameterLower => 0.3,
            Self::UniformVolumeLower => 2.0,
            Self::UniformVolumeUpper => 0.5,
            Self::CenteredDiameterUpper => 0.3,
            Self::CenteredDiameterLower => 0.7,
            Self::CenteredVolume => 0.5,
        }
    }
}

/// An event and its parameter (β for diameters of uniform trees, α otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub event: TreeEvent,
    pub param: f64,
}

/// Local estimators compared in rate experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Knn,
    Cart,
    Grid,
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(Self::Knn),
            "cart" | "cart-like" | "cart_like" => Ok(Self::Cart),
            "grid" => Ok(Self::Grid),
            _ => Err(invalid(format!("unknown estimator `{s}`"))),
        }
    }
}

/// Experiment parameters. Unset fields take per-experiment defaults, and the
/// resolved values are echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Number of splits `N` of a purely random tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<usize>,
    /// Mondrian lifetime `λ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Shape bound of the CART-like tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
    /// Target values of `diam^d / volume` for the elongated-cell probe.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma_bars: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_volume: Option<f64>,
    /// Cells per coordinate of the fixed grid in the pointwise envelope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_cells: Option<usize>,
    /// Size of the finite rectangle class in the sup envelope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_size: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            d: None,
            dims: Vec::new(),
            n: Vec::new(),
            replicates: None,
            splits: None,
            lifetime: None,
            delta: None,
            sigma2: None,
            g: None,
            beta: None,
            estimators: Vec::new(),
            events: Vec::new(),
            gamma_bars: Vec::new(),
            cell_volume: None,
            class_size: None,
            grid_cells: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Fills every field the experiment uses with its default.
    pub fn resolved(&self) -> Self {
        use ExperimentKind::*;
        let mut c = self.clone();
        let kind = c.experiment;
        let set = |slot: &mut Option<f64>, v: f64| {
            slot.get_or_insert(v);
        };
        match kind {
            VolumeInvariance => {
                if c.dims.is_empty() {
                    c.dims = vec![1, 2, 5];
                }
                c.replicates.get_or_insert(10_000);
                c.splits.get_or_insert(50);
            }
            EventFrequency => {
                c.d.get_or_insert(2);
                c.replicates.get_or_insert(10_000);
                c.splits.get_or_insert(50);
                if c.events.is_empty() {
                    c.events = TreeEvent::ALL
                        .iter()
                        .map(|&e| EventSpec {
                            event: e,
                            param: e.default_param(),
                        })
                        .collect();
                }
            }
            UniformNonSr | CenteredNonSr => {
                c.d.get_or_insert(2);
                c.replicates.get_or_insert(10_000);
                c.splits.get_or_insert(50);
            }
            MondrianRatio => {
                c.d.get_or_insert(2);
                c.replicates.get_or_insert(10_000);
                set(&mut c.lifetime, 10.0);
                set(&mut c.delta, 0.1);
            }
            RateCurve => {
                c.d.get_or_insert(1);
                c.replicates.get_or_insert(50);
                set(&mut c.sigma2, 0.25);
                set(&mut c.beta, 2.0);
                c.g.get_or_insert_with(|| "sum_coords".into());
                if c.n.is_empty() {
                    c.n = vec![1_000, 3_000, 10_000, 30_000, 100_000];
                }
                if c.estimators.is_empty() {
                    c.estimators = vec![EstimatorKind::Knn, EstimatorKind::Cart, EstimatorKind::Grid];
                }
            }
            LowerBoundProbe => {
                c.d.get_or_insert(2);
                c.replicates.get_or_insert(10_000);
                set(&mut c.sigma2, 1.0);
                set(&mut c.cell_volume, 0.01);
                if c.n.is_empty() {
                    c.n = vec![10_000];
                }
                if c.gamma_bars.is_empty() {
                    c.gamma_bars = vec![1.0, 10.0, 100.0];
                }
            }
            SupEnvelope => {
                c.d.get_or_insert(2);
                c.replicates.get_or_insert(10_000);
                set(&mut c.sigma2, 1.0);
                set(&mut c.delta, 0.05);
                c.class_size.get_or_insert(50);
                if c.n.is_empty() {
                    c.n = vec![500];
                }
            }
            PointwiseEnvelope => {
                c.d.get_or_insert(1);
                c.replicates.get_or_insert(1_000);
                set(&mut c.sigma2, 0.25);
                set(&mut c.delta, 0.05);
                c.g.get_or_insert_with(|| "sum_coords".into());
                c.grid_cells.get_or_insert(10);
                if c.n.is_empty() {
                    c.n = vec![1_000];
                }
            }
        }
        c
    }

    pub(crate) fn d(&self) -> usize {
        self.d.unwrap_or(2)
    }

    pub(crate) fn replicates(&self) -> usize {
        self.replicates.unwrap_or(0)
    }

    /// Checks the replicate count of a frequency experiment.
    pub(crate) fn frequency_replicates(&self) -> Result<usize> {
        let r = self.replicates();
        if r < 100 {
            return Err(invalid(format!("frequency tests need R >= 100, got {r}")));
        }
        Ok(r)
    }

    pub(crate) fn single_n(&self) -> Result<usize> {
        match self.n.as_slice() {
            [n] if *n >= 1 => Ok(*n),
            other => Err(invalid(format!("expected one sample size, got {other:?}"))),
        }
    }
}

/// Acceptance rule behind a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// frequency <= bound + 3 SE.
    FrequencyAtMostBound,
    /// frequency >= floor - 3 SE.
    FrequencyAtLeastFloor,
    /// Every replicate satisfies the identity, or the frequency equals the
    /// deterministic target.
    Exact,
    /// |slope - target| <= tolerance.
    SlopeWithinTolerance,
    /// statistic < bound.
    StatisticBelowBound,
    /// statistic >= bound.
    StatisticAtLeastBound,
    /// Values strictly increase along the listed order.
    StrictlyIncreasing,
    /// |statistic - target| <= tolerance · target.
    RelativeError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Self::Pass
    }
}

/// One point of a rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub median_sup_error: f64,
    pub median_pointwise_error: f64,
}

/// A checked quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub rule: Rule,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curve: Vec<CurvePoint>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl ResultRow {
    fn new(name: impl Into<String>, rule: Rule, ok: bool) -> Self {
        Self {
            name: name.into(),
            rule,
            verdict: Verdict::from_bool(ok),
            frequency: None,
            slope: None,
            statistic: None,
            se: None,
            bound: None,
            target: None,
            tolerance: None,
            curve: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    /// `frequency <= bound + 3 SE`.
    pub fn at_most(name: impl Into<String>, hits: usize, replicates: usize, bound: f64) -> Self {
        let p = hits as f64 / replicates as f64;
        let se = binomial_se(p, replicates);
        let mut row = Self::new(name, Rule::FrequencyAtMostBound, p <= bound + 3.0 * se);
        row.frequency = Some(p);
        row.se = Some(se);
        row.bound = Some(bound);
        row
    }

    /// `frequency >= floor - 3 SE`.
    pub fn at_least(name: impl Into<String>, hits: usize, replicates: usize, floor: f64) -> Self {
        let p = hits as f64 / replicates as f64;
        let se = binomial_se(p, replicates);
        let mut row = Self::new(name, Rule::FrequencyAtLeastFloor, p >= floor - 3.0 * se);
        row.frequency = Some(p);
        row.se = Some(se);
        row.bound = Some(floor);
        row
    }

    /// The frequency must equal `target` exactly.
    pub fn exact(name: impl Into<String>, hits: usize, replicates: usize, target: f64) -> Self {
        let p = hits as f64 / replicates as f64;
        let mut row = Self::new(name, Rule::Exact, p == target);
        row.frequency = Some(p);
        row.target = Some(target);
        row
    }

    pub fn statistic_below(name: impl Into<String>, statistic: f64, bound: f64) -> Self {
        let mut row = Self::new(name, Rule::StatisticBelowBound, statistic < bound);
        row.statistic = Some(statistic);
        row.bound = Some(bound);
        row
    }

    pub fn statistic_at_least(name: impl Into<String>, statistic: f64, bound: f64) -> Self {
        let mut row = Self::new(name, Rule::StatisticAtLeastBound, statistic >= bound);
        row.statistic = Some(statistic);
        row.bound = Some(bound);
        row
    }

    pub fn relative_error(name: impl Into<String>, statistic: f64, target: f64, tolerance: f64) -> Self {
        let ok = (statistic - target).abs() <= tolerance * target.abs();
        let mut row = Self::new(name, Rule::RelativeError, ok);
        row.statistic = Some(statistic);
        row.target = Some(target);
        row.tolerance = Some(tolerance);
        row
    }

    pub fn increasing(name: impl Into<String>, values: &[(String, f64)]) -> Self {
        let ok = values.windows(2).all(|w| w[0].1 < w[1].1);
        let mut row = Self::new(name, Rule::StrictlyIncreasing, ok);
        row.values = values.iter().cloned().collect();
        row
    }

    pub fn slope(name: impl Into<String>, slope: f64, se: f64, target: f64, tolerance: f64) -> Self {
        let mut row = Self::new(name, Rule::SlopeWithinTolerance, (slope - target).abs() <= tolerance);
        row.slope = Some(slope);
        row.se = Some(se);
        row.target = Some(target);
        row.tolerance = Some(tolerance);
        row
    }

    pub fn with_value(mut self, key: impl Into<String>, value: f64) -> Self {
        self.values.insert(key.into(), value);
        self
    }
}

/// One raw replicate statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub name: String,
    pub replicate: usize,
    pub statistic: f64,
}

/// Outcome of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub results: Vec<ResultRow>,
    pub verdict: Verdict,
    /// Wall-clock time; left empty unless timing was requested, so that
    /// reports are reproducible byte for byte.
    pub runtime_seconds: Option<f64>,
    #[serde(skip)]
    pub raw: Vec<RawRecord>,
}

impl ExperimentReport {
    pub(crate) fn new(config: ExperimentConfig, results: Vec<ResultRow>, raw: Vec<RawRecord>) -> Self {
        let verdict = Verdict::from_bool(results.iter().all(|r| r.verdict.passed()));
        Self {
            seed: config.seed,
            config,
            results,
            verdict,
            runtime_seconds: None,
            raw,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn row(&self, name: &str) -> Option<&ResultRow> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Raw `(name, replicate, statistic)` rows as CSV.
    pub fn write_raw_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["name", "replicate", "statistic"])?;
        for r in &self.raw {
            w.write_record([r.name.clone(), r.replicate.to_string(), crate::data::fmt_f64(r.statistic)])?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<raw csv>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Runs `f` on replicates `0..r` of stream `name`, in parallel, and returns
/// the outputs in replicate order.
pub(crate) fn replicate<T, F>(seed: u64, name: &str, r: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    (0..r)
        .into_par_iter()
        .map(|i| f(&mut stream_rng(seed, name, i as u64)))
        .collect()
}

pub(crate) fn raw_rows(name: &str, values: &[f64]) -> Vec<RawRecord> {
    values
        .iter()
        .enumerate()
        .map(|(replicate, &statistic)| RawRecord {
            name: name.to_string(),
            replicate,
            statistic,
        })
        .collect()
}

/// Runs the experiment described by `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = cfg.resolved();
    match cfg.experiment {
        ExperimentKind::VolumeInvariance => volume_invariance(&cfg),
        ExperimentKind::EventFrequency => event_frequency(&cfg),
        ExperimentKind::UniformNonSr => non_sr_frequency(&cfg, TreeKind::Uniform),
        ExperimentKind::CenteredNonSr => non_sr_frequency(&cfg, TreeKind::Centered),
        ExperimentKind::MondrianRatio => mondrian_ratio(&cfg),
        ExperimentKind::RateCurve => rate_curve(&cfg),
        ExperimentKind::LowerBoundProbe => lower_bound_probe(&cfg),
        ExperimentKind::SupEnvelope => sup_envelope(&cfg),
        ExperimentKind::PointwiseEnvelope => pointwise_envelope(&cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases_resolve() {
        assert_eq!("prop6_4".parse::<ExperimentKind>().unwrap(), ExperimentKind::UniformNonSr);
        assert_eq!("rate_curve".parse::<ExperimentKind>().unwrap(), ExperimentKind::RateCurve);
        let (kind, events) = ExperimentKind::parse_with_events("prop6_3").unwrap();
        assert_eq!(kind, ExperimentKind::EventFrequency);
        assert_eq!(events.len(), 2);
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::MondrianRatio, 7);
        cfg.lifetime = Some(3.0);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);
        assert!(ExperimentConfig::from_json(r#"{"experiment":"rate_curve","seed":1,"bogus":2}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"rate_curve"}"#).is_err());
    }

    #[test]
    fn rows_apply_three_se() {
        // p = 0.12, SE ≈ 0.0325, so 0.12 <= 0.03 + 3 SE
        assert!(ResultRow::at_most("a", 12, 100, 0.03).verdict.passed());
        assert!(!ResultRow::at_most("a", 50, 100, 0.03).verdict.passed());
        assert!(ResultRow::at_least("b", 8, 100, 1.0 / 11.0).verdict.passed());
        assert!(!ResultRow::at_least("b", 0, 100, 1.0 / 11.0).verdict.passed());
    }

    #[test]
    fn replicates_are_order_preserving() {
        use rand::Rng;
        let a = replicate(3, "x", 64, |rng| Ok(rng.random::<u64>())).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = pool.install(|| replicate(3, "x", 64, |rng| Ok(rng.random::<u64>()))).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
