//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when an experiment or audit verdict is FAIL,
//! 2 on usage errors and unreadable or malformed files.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::data::{fmt_f64, load_csv, load_points, Dataset};
use crate::error::Error;
use crate::estimators::{
    cart_build, tree_predict, CartConfig, CartCost, Fallback, FixedGrid, GridRegressor, KnnRegressor,
    LeafReport, PartitionTree, Regressor,
};
use crate::experiments::{self, tuning, EstimatorKind, EventSpec, ExperimentConfig, ExperimentKind, TreeEvent};
use crate::geometry::{beta_to_gamma, gamma_to_beta, AxisBox, SR_TOLERANCE};
use crate::random_trees::{
    grow_path, mondrian_cell, volume_invariance_check, MondrianParams, PathCell, SplitSequence, TreeKind,
};
use crate::vc_bounds as vc;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "localreg",
    version,
    about = "Local-average regression estimators, shape-regular partitions and a seeded Monte Carlo harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a local-average estimator on a CSV sample and write the model JSON.
    ///
    /// The estimators are local maps: the k-nearest-neighbour ball, the leaves
    /// of the CART-like β-shape-regular tree with at least m points per child,
    /// or the cells of a fixed rectangular grid.
    Fit(FitArgs),
    /// Evaluate a fitted local-average estimator at query points.
    Predict(PredictArgs),
    /// Grow the cell of one point in a purely random tree (uniform or centered
    /// splits) or a Mondrian process, and report its split sequence (D_i, S_i)
    /// and shape.
    SimulateTree(SimulateArgs),
    /// Audit the β (largest over smallest side) and γ (diam^d over volume)
    /// shape-regularity profile of a CART-like tree.
    Shapecheck(ShapecheckArgs),
    /// Evaluate a closed-form VC deviation bound: Sauer-Shelah growth, noise
    /// envelopes, estimator error bounds and random-tree tail bounds.
    Bounds(BoundsArgs),
    /// Run the convergence-rate experiment: log-log slope of the sup-norm
    /// error of rate-tuned k-NN, CART-like and grid estimators.
    Rates(RatesArgs),
    /// Run a Monte Carlo verification experiment and write its report.
    ///
    /// Experiments: volume_invariance, event_frequency, uniform_non_sr,
    /// centered_non_sr, mondrian_ratio, rate_curve, lower_bound_probe,
    /// sup_envelope, pointwise_envelope.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EstimatorArg {
    Knn,
    Cart,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FallbackArg {
    Keep,
    LargestSide,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Training sample with columns x1,...,xd,y.
    #[arg(long)]
    data: PathBuf,
    /// Covariate dimension; inferred from the header when omitted.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    /// Neighbour count; defaults to n^(2/(d+2)) log(n)^(d/(d+2)).
    #[arg(long)]
    k: Option<usize>,
    /// Minimal points per child; defaults to n^(2/(d+2)).
    #[arg(long)]
    m: Option<usize>,
    /// Largest admissible side ratio of CART-like cells.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = FallbackArg::Keep)]
    fallback: FallbackArg,
    /// Grid cells per coordinate; defaults to n^(1/(d+2)).
    #[arg(long)]
    cells: Option<usize>,
    /// Model JSON destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Query points with columns x1,...,xd (a trailing y column is ignored).
    #[arg(long)]
    query: PathBuf,
    /// CSV destination with columns x1,...,xd,yhat (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimKind {
    Uniform,
    Centered,
    Mondrian,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    kind: SimKind,
    /// Query point, comma separated; defaults to the cube's center.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
    /// Dimension when --x is omitted.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Number of splits N (uniform and centered trees).
    #[arg(long = "N", visible_alias = "splits", default_value_t = 50)]
    splits: usize,
    /// Mondrian lifetime λ.
    #[arg(long, default_value_t = 10.0)]
    lifetime: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShapecheckArgs {
    /// Tree JSON, or a CART-like model written by `fit`.
    #[arg(long)]
    tree: PathBuf,
    /// Fail (exit 1) when some leaf has a side ratio above this value.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Formula {
    /// (n+1)^v
    Sauer,
    /// v log(n+1)
    LogSauer,
    /// sum_{i<=v} C(n,i)
    SauerBinomial,
    /// sqrt(2σ² log(S/δ)) for a class with S patterns
    SupNoise,
    /// sqrt(2σ² log((n+1)^v/δ)/count)
    Variance,
    /// variance term plus L diam
    Pointwise,
    /// 8 log(4(2n+1)^v/δ)
    LargeSample,
    CartMinLeaf,
    KnnMinK,
    /// error bound from the cell volume under minimal mass
    Volume,
    OptimalVolume,
    Knn,
    Cart,
    /// Vapnik and Chernoff envelopes of the empirical mass
    Mass,
    VapnikMassUpper,
    ElongationConstant,
    ElongationRmse,
    ElongationMass,
    UniformDiameterUpper,
    UniformDiameterLower,
    UniformVolumeLower,
    UniformVolumeUpper,
    CenteredDiameterUpper,
    CenteredDiameterLower,
    UniformNonSr,
    CenteredNonSr,
    MondrianRatio,
    MondrianMaxDelta,
    BetaToGamma,
    GammaToBeta,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    formula: Formula,
    #[arg(long)]
    n: Option<u64>,
    /// VC dimension of the class.
    #[arg(long)]
    v: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, default_value_t = 0.0)]
    lipschitz: f64,
    /// Number of sample points in the cell.
    #[arg(long)]
    count: Option<u64>,
    #[arg(long)]
    diameter: Option<f64>,
    #[arg(long)]
    volume: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    /// Side-ratio bound β (CART-like tree, β-to-γ conversion).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of realised patterns S (sup-noise, mass envelopes).
    #[arg(long)]
    shatter: Option<f64>,
    /// True (mass) or empirical (vapnik-mass-upper) probability of the set.
    #[arg(long)]
    p: Option<f64>,
    /// Number of splits N of a random tree.
    #[arg(long = "N", visible_alias = "splits")]
    splits: Option<usize>,
    /// Event parameter (β or α of the tail bound).
    #[arg(long)]
    param: Option<f64>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    /// Dimensions of the volume-invariance experiment.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Sample sizes.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Monte Carlo replicates.
    #[arg(long = "R", visible_alias = "replicates")]
    replicates: Option<usize>,
    /// Splits N of a purely random tree.
    #[arg(long = "N", visible_alias = "splits")]
    splits: Option<usize>,
    #[arg(long)]
    lifetime: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// Built-in regression function.
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_delimiter = ',', value_enum)]
    estimators: Vec<EstimatorArg>,
    /// Tree events as `name` or `name=param`.
    #[arg(long, value_delimiter = ',')]
    events: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    gamma_bars: Vec<f64>,
    #[arg(long)]
    cell_volume: Option<f64>,
    #[arg(long)]
    grid_cells: Option<usize>,
    #[arg(long)]
    class_size: Option<usize>,
    /// Worker threads; results do not depend on this value.
    #[arg(long)]
    threads: Option<usize>,
    /// Report JSON destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-replicate statistics as CSV.
    #[arg(long)]
    raw: Option<PathBuf>,
    /// Record the wall-clock runtime in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct RatesArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Experiment name or alias; may come from the config file instead.
    #[arg(long)]
    experiment: Option<String>,
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "{m}"),
            Self::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Whether the command's verdict passed.
enum Outcome {
    Pass,
    Fail,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<Outcome> {
    match cmd {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::SimulateTree(a) => simulate(a),
        Command::Shapecheck(a) => shapecheck(a),
        Command::Bounds(a) => bounds(a),
        Command::Rates(a) => experiment(Some("rate_curve".into()), a.exp),
        Command::Verify(a) => experiment(a.experiment, a.exp),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
            .into()
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| {
                    Error::Io {
                        path: "<stdout>".into(),
                        source,
                    }
                    .into()
                })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)? + "\n")
}

// ---- fit / predict ----

/// Fitted estimator persisted by `fit`; the training sample is embedded so
/// that `predict` needs no other file.
#[derive(Debug, Serialize, Deserialize)]
pub struct Model {
    pub schema_version: u32,
    #[serde(flatten)]
    pub estimator: ModelKind,
    pub data: Dataset,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum ModelKind {
    Knn { k: usize },
    Cart { config: CartConfig, tree: PartitionTree },
    Grid { grid: FixedGrid },
}

impl Model {
    pub fn predict(&self, queries: &[Vec<f64>]) -> crate::Result<Vec<f64>> {
        match &self.estimator {
            ModelKind::Knn { k } => {
                let reg = KnnRegressor::fit(&self.data, *k)?;
                queries.iter().map(|q| reg.predict(q)).collect()
            }
            ModelKind::Cart { tree, .. } => queries.iter().map(|q| tree_predict(tree, &self.data, q)).collect(),
            ModelKind::Grid { grid } => {
                let reg = GridRegressor::fit(grid.clone(), &self.data)?;
                queries.iter().map(|q| reg.predict(q)).collect()
            }
        }
    }
}

fn header_dim(path: &Path) -> CliResult<usize> {
    let mut reader = csv::Reader::from_path(path).map_err(Error::from)?;
    let width = reader.headers().map_err(Error::from)?.len();
    if width < 2 {
        return Err(usage(format!("{}: need columns x1,...,xd,y", path.display())));
    }
    Ok(width - 1)
}

fn fit(a: FitArgs) -> CliResult<Outcome> {
    let d = match a.d {
        Some(d) => d,
        None => header_dim(&a.data)?,
    };
    let ds = load_csv(&a.data, d)?;
    let n = ds.n();
    let estimator = match a.estimator {
        EstimatorArg::Knn => ModelKind::Knn {
            k: a.k.unwrap_or_else(|| tuning(EstimatorKind::Knn, n, d)),
        },
        EstimatorArg::Cart => {
            let fallback = match a.fallback {
                FallbackArg::Keep => Fallback::Keep,
                FallbackArg::LargestSide => Fallback::LargestSide,
            };
            let m = a.m.unwrap_or_else(|| tuning(EstimatorKind::Cart, n, d));
            let config = CartConfig::new(m, a.beta).with_fallback(fallback);
            let tree = cart_build(&ds, &config, &CartCost)?;
            ModelKind::Cart { config, tree }
        }
        EstimatorArg::Grid => {
            let cells = a.cells.unwrap_or_else(|| tuning(EstimatorKind::Grid, n, d));
            ModelKind::Grid {
                grid: FixedGrid::uniform(d, cells)?,
            }
        }
    };
    let model = Model {
        schema_version: MODEL_SCHEMA_VERSION,
        estimator,
        data: ds,
    };
    // Rejects k > n before anything is written.
    model.predict(&[])?;
    emit(a.out.as_deref(), &to_json(&model)?)?;
    Ok(Outcome::Pass)
}

fn read_model(path: &Path) -> CliResult<Model> {
    let model: Model = serde_json::from_str(&read_text(path)?).map_err(Error::from)?;
    if model.schema_version != MODEL_SCHEMA_VERSION {
        return Err(usage(format!(
            "{}: unsupported model schema version {}",
            path.display(),
            model.schema_version
        )));
    }
    Ok(model)
}

fn predict(a: PredictArgs) -> CliResult<Outcome> {
    let model = read_model(&a.model)?;
    let d = model.data.d();
    let queries = load_points(&a.query, d)?;
    let preds = model.predict(&queries)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    head.push("yhat".into());
    w.write_record(&head).map_err(Error::from)?;
    for (q, p) in queries.iter().zip(&preds) {
        w.write_record(q.iter().chain(std::iter::once(p)).map(|&v| fmt_f64(v)))
            .map_err(Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&bytes))?;
    Ok(Outcome::Pass)
}

// ---- simulate-tree ----

#[derive(Debug, Serialize)]
struct CellStats {
    sides: Vec<f64>,
    volume: f64,
    log_volume: f64,
    diameter: f64,
    shape_ratio: f64,
    reduction_product: f64,
    volume_matches_product: bool,
    direction_counts: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct Simulation {
    kind: &'static str,
    seed: u64,
    x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    splits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lifetime: Option<f64>,
    sequence: SplitSequence,
    cell: CellStats,
}

fn cell_stats(cell: &PathCell, seq: &SplitSequence) -> CliResult<CellStats> {
    let sides = cell.sides();
    Ok(CellStats {
        log_volume: sides.iter().map(|h| h.ln()).sum(),
        volume: cell.volume(),
        diameter: cell.diameter(),
        shape_ratio: cell.shape_ratio()?,
        reduction_product: seq.reduction_product(),
        volume_matches_product: volume_invariance_check(cell, seq),
        direction_counts: seq.direction_counts(cell.dim()),
        sides,
    })
}

fn simulate(a: SimulateArgs) -> CliResult<Outcome> {
    let seed = a
        .seed
        .ok_or_else(|| usage("--seed is required: every random draw is seeded explicitly"))?;
    let x = if a.x.is_empty() { vec![0.5; a.d] } else { a.x };
    let (kind, splits, lifetime, (cell, seq)) = match a.kind {
        SimKind::Uniform => ("uniform", Some(a.splits), None, grow_path(TreeKind::Uniform, &x, a.splits, seed)?),
        SimKind::Centered => ("centered", Some(a.splits), None, grow_path(TreeKind::Centered, &x, a.splits, seed)?),
        SimKind::Mondrian => {
            let params = MondrianParams::new(a.lifetime, x.len())?;
            ("mondrian", None, Some(a.lifetime), mondrian_cell(&params, &x, seed)?)
        }
    };
    let sim = Simulation {
        kind,
        seed,
        cell: cell_stats(&cell, &seq)?,
        x,
        splits,
        lifetime,
        sequence: seq,
    };
    emit(a.out.as_deref(), &to_json(&sim)?)?;
    Ok(Outcome::Pass)
}

// ---- shapecheck ----

#[derive(Debug, Serialize)]
struct ShapeAudit {
    leaves: usize,
    max_depth: usize,
    max_beta: f64,
    max_gamma: f64,
    min_count: usize,
    beta_profile: Vec<f64>,
    gamma_profile: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<experiments::Verdict>,
    leaf_reports: Vec<LeafReport>,
}

fn read_tree(path: &Path) -> CliResult<PartitionTree> {
    let value: Value = serde_json::from_str(&read_text(path)?).map_err(Error::from)?;
    let tree = match value.get("estimator") {
        Some(_) => match read_model(path)?.estimator {
            ModelKind::Cart { tree, .. } => tree,
            _ => return Err(usage(format!("{}: model has no tree", path.display()))),
        },
        None => serde_json::from_value(value).map_err(Error::from)?,
    };
    Ok(tree)
}

fn shapecheck(a: ShapecheckArgs) -> CliResult<Outcome> {
    let tree = read_tree(&a.tree)?;
    let reports = tree.leaf_reports()?;
    let beta_profile: Vec<f64> = reports.iter().map(|r| r.beta).collect();
    let gamma_profile: Vec<f64> = reports.iter().map(|r| r.gamma).collect();
    let max_beta = beta_profile.iter().copied().fold(1.0, f64::max);
    let verdict = match a.beta {
        Some(b) if !(b >= 1.0) => return Err(usage(format!("--beta must be >= 1, got {b}"))),
        Some(b) => Some(experiments::Verdict::from_bool(max_beta <= b * (1.0 + SR_TOLERANCE))),
        None => None,
    };
    let audit = ShapeAudit {
        leaves: reports.len(),
        max_depth: tree.max_depth(),
        max_beta,
        max_gamma: gamma_profile.iter().copied().fold(0.0, f64::max),
        min_count: reports.iter().map(|r| r.count).min().unwrap_or(0),
        gamma_bound: a.beta.map(|b| beta_to_gamma(b, tree.dim())).transpose()?,
        beta_bound: a.beta,
        verdict,
        beta_profile,
        gamma_profile,
        leaf_reports: reports,
    };
    emit(a.out.as_deref(), &to_json(&audit)?)?;
    Ok(match verdict {
        Some(v) if !v.passed() => Outcome::Fail,
        _ => Outcome::Pass,
    })
}

// ---- bounds ----

fn need<T>(value: Option<T>, flag: &str, formula: Formula) -> CliResult<T> {
    value.ok_or_else(|| {
        let name = formula.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        usage(format!("formula `{name}` needs {flag}"))
    })
}

fn bounds(a: BoundsArgs) -> CliResult<Outcome> {
    use Formula as F;
    let f = a.formula;
    let n = || need(a.n, "--n", f);
    let v = || need(a.v, "--v", f);
    let d = || need(a.d, "--d", f);
    let delta = || need(a.delta, "--delta", f);
    let sigma2 = || need(a.sigma2, "--sigma2", f);
    let splits = || need(a.splits, "--N", f);
    let param = || need(a.param, "--param", f);
    let spec = |v: u32| -> CliResult<vc::BoundSpec> {
        Ok(vc::BoundSpec::new(n()?, delta()?, v, sigma2()?)?
            .with_mass(a.kappa, a.density)
            .with_lipschitz(a.lipschitz))
    };
    let log_shatter = || -> CliResult<f64> {
        let s = need(a.shatter, "--shatter", f)?;
        if !(s >= 1.0) {
            return Err(usage(format!("--shatter must be >= 1, got {s}")));
        }
        Ok(s.ln())
    };
    let tail = |t: vc::TailBound| to_json(&t);
    let scalar = |x: f64| format!("{x}\n");
    let text = match f {
        F::Sauer => scalar(vc::sauer_bound(n()?, v()?)),
        F::LogSauer => scalar(vc::log_sauer(n()?, v()?)),
        F::SauerBinomial => scalar(vc::log_sauer_binomial(n()?, v()?).exp().round()),
        F::SupNoise => scalar(vc::sup_noise_threshold(sigma2()?, log_shatter()?, delta()?)?),
        F::Variance => scalar(vc::variance_term(&spec(v()?)?, need(a.count, "--count", f)?)?),
        F::Pointwise => scalar(vc::pointwise_bound(
            &spec(v()?)?,
            need(a.count, "--count", f)?,
            a.lipschitz,
            need(a.diameter, "--diameter", f)?,
        )?),
        F::LargeSample => scalar(vc::large_sample_threshold(n()?, v()?, delta()?)?),
        F::CartMinLeaf => scalar(vc::cart_min_leaf(n()?, d()?, delta()?)?),
        F::KnnMinK => scalar(vc::knn_min_k(n()?, d()?, delta()?)?),
        F::Volume => scalar(vc::volume_bound(
            &spec(v()?)?,
            need(a.volume, "--volume", f)?,
            need(a.diameter, "--diameter", f)?,
        )?),
        F::OptimalVolume => scalar(vc::optimal_cell_volume(n()?, v()?, delta()?, d()?)?),
        F::Knn => {
            let d = d()?;
            scalar(vc::knn_bound(&spec(d as u32 + 1)?, d, need(a.k, "--k", f)?)?)
        }
        F::Cart => {
            let d = d()?;
            let beta = need(a.beta, "--beta", f)?;
            scalar(vc::cart_bound(&spec(2 * d as u32)?, d, need(a.m, "--m", f)?, beta)?)
        }
        F::Mass => to_json(&vc::empirical_mass_bounds(n()?, need(a.p, "--p", f)?, delta()?, log_shatter()?)?)?,
        F::VapnikMassUpper => scalar(vc::vapnik_mass_upper(n()?, need(a.p, "--p", f)?, delta()?, log_shatter()?)?),
        F::ElongationConstant => scalar(vc::elongation_constant(d()?)),
        F::ElongationRmse => scalar(vc::elongation_rmse_lower(d()?, need(a.gamma, "--gamma", f)?, sigma2()?, n()?)),
        F::ElongationMass => scalar(vc::elongation_mass_requirement(d()?)),
        F::UniformDiameterUpper => tail(vc::uniform_diameter_upper(d()?, splits()?, param()?)?)?,
        F::UniformDiameterLower => tail(vc::uniform_diameter_lower(d()?, splits()?, param()?)?)?,
        F::UniformVolumeLower => tail(vc::uniform_volume_lower(splits()?, param()?)?)?,
        F::UniformVolumeUpper => tail(vc::uniform_volume_upper(splits()?, param()?)?)?,
        F::CenteredDiameterUpper => tail(vc::centered_diameter_upper(d()?, splits()?, param()?)?)?,
        F::CenteredDiameterLower => tail(vc::centered_diameter_lower(d()?, splits()?, param()?)?)?,
        F::UniformNonSr => tail(vc::uniform_non_sr(d()?, splits()?)?)?,
        F::CenteredNonSr => tail(vc::centered_non_sr(d()?, splits()?)?)?,
        F::MondrianRatio => tail(vc::mondrian_ratio_bound(d()?, delta()?)?)?,
        F::MondrianMaxDelta => scalar(vc::mondrian_max_delta(d()?)),
        F::BetaToGamma => scalar(beta_to_gamma(need(a.beta, "--beta", f)?, d()?)?),
        F::GammaToBeta => scalar(gamma_to_beta(need(a.gamma, "--gamma", f)?)?),
    };
    emit(None, &text)?;
    Ok(Outcome::Pass)
}

// ---- rates / verify ----

fn parse_event(s: &str) -> CliResult<EventSpec> {
    let (name, param) = match s.split_once('=') {
        Some((name, p)) => {
            let p: f64 = p.parse().map_err(|_| usage(format!("bad event parameter in `{s}`")))?;
            (name, Some(p))
        }
        None => (s, None),
    };
    let event: TreeEvent =
        serde_json::from_value(Value::String(name.into())).map_err(|_| usage(format!("unknown event `{name}`")))?;
    Ok(EventSpec {
        event,
        param: param.unwrap_or_else(|| event.default_param()),
    })
}

fn insert<T: Serialize>(map: &mut Map<String, Value>, key: &str, value: T) -> CliResult<()> {
    map.insert(key.into(), serde_json::to_value(value).map_err(Error::from)?);
    Ok(())
}

/// Config file fields overlaid with the flags that were given.
fn merge_config(experiment: Option<String>, a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let mut map = match &a.config {
        Some(path) => match serde_json::from_str(&read_text(path)?).map_err(Error::from)? {
            Value::Object(m) => m,
            _ => return Err(usage(format!("{}: config must be a JSON object", path.display()))),
        },
        None => Map::new(),
    };
    let name = match experiment {
        Some(e) => e,
        None => match map.get("experiment") {
            Some(Value::String(s)) => s.clone(),
            _ => return Err(usage("--experiment is required (or an `experiment` field in --config)")),
        },
    };
    let (kind, alias_events) = ExperimentKind::parse_with_events(&name).map_err(|e| usage(e.to_string()))?;
    insert(&mut map, "experiment", kind)?;
    if !alias_events.is_empty() && !map.contains_key("events") {
        let specs: Vec<EventSpec> = alias_events
            .iter()
            .map(|&event| EventSpec {
                event,
                param: event.default_param(),
            })
            .collect();
        insert(&mut map, "events", specs)?;
    }
    macro_rules! opt {
        ($key:literal, $field:expr) => {
            if let Some(v) = &$field {
                insert(&mut map, $key, v)?;
            }
        };
    }
    macro_rules! list {
        ($key:literal, $field:expr) => {
            if !$field.is_empty() {
                insert(&mut map, $key, &$field)?;
            }
        };
    }
    opt!("seed", a.seed);
    opt!("d", a.d);
    list!("dims", a.dims);
    list!("n", a.n);
    opt!("replicates", a.replicates);
    opt!("splits", a.splits);
    opt!("lifetime", a.lifetime);
    opt!("delta", a.delta);
    opt!("sigma2", a.sigma2);
    opt!("g", a.g);
    opt!("beta", a.beta);
    list!("estimators", a.estimators);
    list!("gamma_bars", a.gamma_bars);
    opt!("cell_volume", a.cell_volume);
    opt!("grid_cells", a.grid_cells);
    opt!("class_size", a.class_size);
    if !a.events.is_empty() {
        let specs = a.events.iter().map(|s| parse_event(s)).collect::<CliResult<Vec<_>>>()?;
        insert(&mut map, "events", specs)?;
    }
    if !map.contains_key("seed") {
        return Err(usage("--seed is required: every random draw is seeded explicitly"));
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| usage(format!("invalid config: {e}")))
}

fn experiment(name: Option<String>, a: ExperimentArgs) -> CliResult<Outcome> {
    let cfg = merge_config(name, &a)?;
    let pool = match a.threads {
        Some(0) => return Err(usage("--threads must be >= 1")),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| usage(e.to_string()))?;
    let start = Instant::now();
    let mut report = pool.install(|| experiments::run(&cfg))?;
    if a.timing {
        report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    if let Some(path) = &a.raw {
        let file = fs::File::create(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        report.write_raw_csv(std::io::BufWriter::new(file))?;
    }
    emit(a.out.as_deref(), &report.to_json()?)?;
    Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_subcommand_has_help() {
        let cmd = Cli::command();
        for sub in cmd.get_subcommands() {
            assert!(sub.get_about().is_some(), "{} lacks help", sub.get_name());
        }
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"experiment": "uniform_non_sr", "seed": 1, "d": 3, "replicates": 200}"#).unwrap();
        let args = Cli::try_parse_from(["localreg", "verify", "--config", path.to_str().unwrap(), "--seed", "9", "--N", "30"])
            .unwrap();
        let Command::Verify(v) = args.command else { panic!() };
        let cfg = merge_config(v.experiment, &v.exp).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.d, Some(3));
        assert_eq!(cfg.splits, Some(30));
        assert_eq!(cfg.replicates, Some(200));
    }

    #[test]
    fn alias_selects_events() {
        let args = Cli::try_parse_from(["localreg", "verify", "--experiment", "prop6_3", "--seed", "1"]).unwrap();
        let Command::Verify(v) = args.command else { panic!() };
        let cfg = merge_config(v.experiment, &v.exp).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::EventFrequency);
        let events: Vec<TreeEvent> = cfg.events.iter().map(|e| e.event).collect();
        assert_eq!(events, vec![TreeEvent::UniformVolumeLower, TreeEvent::UniformVolumeUpper]);
    }

    #[test]
    fn missing_seed_is_a_usage_error() {
        assert_eq!(run(["localreg", "verify", "--experiment", "prop6_4"]), 2);
        assert_eq!(run(["localreg", "simulate-tree", "--kind", "uniform"]), 2);
    }

    #[test]
    fn unknown_subcommand_and_experiment() {
        assert_eq!(run(["localreg", "frobnicate"]), 2);
        assert_eq!(run(["localreg", "verify", "--experiment", "nope", "--seed", "1"]), 2);
        assert_eq!(run(["localreg", "bounds", "--formula", "sauer", "--n", "3"]), 2);
    }

    #[test]
    fn events_parse_with_parameters() {
        let e = parse_event("uniform_volume_lower=3").unwrap();
        assert_eq!(e.event, TreeEvent::UniformVolumeLower);
        assert_eq!(e.param, 3.0);
        assert_eq!(parse_event("centered_volume").unwrap().param, 0.5);
        assert!(parse_event("bogus").is_err());
    }
}
