//! Regression samples: synthetic generation, built-in regression functions
//! with known Lipschitz constants, and CSV persistence.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::HyperRectangle;
use crate::rng::{seeded, StreamRng};

/// A regression sample `(X_i, Y_i)`, `i = 1..n`, with covariates in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset")]
pub struct Dataset {
    d: usize,
    /// Row-major `n x d` covariates.
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawDataset {
    d: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(default)]
    truth: Option<Vec<f64>>,
}

impl TryFrom<RawDataset> for Dataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        let ds = Dataset::new(raw.d, raw.x, raw.y)?;
        match raw.truth {
            Some(t) => ds.with_truth(t),
            None => Ok(ds),
        }
    }
}

impl Dataset {
    pub fn new(d: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d must be >= 1"));
        }
        if y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if x.len() != y.len() * d {
            return Err(Error::DimensionMismatch {
                expected: y.len() * d,
                found: x.len(),
            });
        }
        if let Some(pos) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at flat position {pos}")));
        }
        Ok(Self {
            d,
            x,
            y,
            truth: None,
        })
    }

    /// Builds a dataset from covariate rows.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::new(d, rows.concat(), y)
    }

    pub fn with_truth(mut self, truth: Vec<f64>) -> Result<Self> {
        if truth.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: truth.len(),
            });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.d)
    }

    pub fn covariates(&self) -> &[f64] {
        &self.x
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    /// `g(X_i)` for synthetic samples.
    pub fn truth(&self) -> Option<&[f64]> {
        self.truth.as_deref()
    }

    /// Same covariates, responses shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.y.iter_mut().for_each(|v| *v += c);
        out
    }
}

/// Built-in regression functions on `[0,1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressionFunction {
    /// `g(x) = sum_k x_k`; every partial derivative equals one.
    SumCoords { d: usize },
    Constant { d: usize, c: f64 },
    /// `g(x) = prod_k sin(π x_k)`.
    SineProduct { d: usize },
}

impl RegressionFunction {
    pub fn dim(&self) -> usize {
        match *self {
            Self::SumCoords { d } | Self::Constant { d, .. } | Self::SineProduct { d } => d,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::SumCoords { .. } => "sum_coords".into(),
            Self::Constant { c, .. } => format!("constant_c={c}"),
            Self::SineProduct { .. } => "sine_product".into(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Self::SumCoords { .. } => x.iter().sum(),
            Self::Constant { c, .. } => c,
            Self::SineProduct { .. } => x.iter().map(|v| (std::f64::consts::PI * v).sin()).product(),
        }
    }

    /// Global Lipschitz constant with respect to the Euclidean norm.
    ///
    /// For the sine product, `|∇g|² = π² Σ_k cos²(πx_k) Π_{j≠k} sin²(πx_j)`,
    /// and the sum is the probability of exactly one success among
    /// independent Bernoulli(cos²) trials, hence at most one: `L = π`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Self::SumCoords { d } => (d as f64).sqrt(),
            Self::Constant { .. } => 0.0,
            Self::SineProduct { .. } => std::f64::consts::PI,
        }
    }

    /// Local Lipschitz constant `L(V)` on a cell (an upper bound for the
    /// sine product).
    pub fn local_lipschitz(&self, _cell: &HyperRectangle) -> f64 {
        self.lipschitz()
    }
}

/// Resolves a built-in regression function by name.
///
/// Accepted names: `sum_coords`, `sine_product`, `constant_c` (value 1) and
/// `constant_c=<value>`.
pub fn builtin_g(name: &str, d: usize) -> Result<RegressionFunction> {
    if d == 0 {
        return Err(invalid("d must be >= 1"));
    }
    match name {
        "sum_coords" => Ok(RegressionFunction::SumCoords { d }),
        "sine_product" => Ok(RegressionFunction::SineProduct { d }),
        "constant_c" | "constant" => Ok(RegressionFunction::Constant { d, c: 1.0 }),
        other => {
            let value = other
                .strip_prefix("constant_c=")
                .or_else(|| other.strip_prefix("constant="))
                .ok_or_else(|| invalid(format!("unknown regression function {other:?}")))?;
            let c: f64 = value
                .parse()
                .map_err(|_| invalid(format!("bad constant in {other:?}")))?;
            Ok(RegressionFunction::Constant { d, c })
        }
    }
}

/// Conditionally sub-Gaussian noise with envelope parameter `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// `N(0, σ²)`.
    Gaussian { sigma2: f64 },
    /// Uniform on `[-σ, σ]` (sub-Gaussian with parameter `σ²` by Hoeffding).
    BoundedUniform { sigma2: f64 },
    /// `N(0, s(x)²)` with `s(x) = σ (0.5 + 0.5 x_1) <= σ`.
    Heteroscedastic { sigma2: f64 },
}

impl NoiseModel {
    pub fn gaussian(sigma2: f64) -> Self {
        Self::Gaussian { sigma2 }
    }

    pub fn sigma2(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma2 }
            | Self::BoundedUniform { sigma2 }
            | Self::Heteroscedastic { sigma2 } => sigma2,
        }
    }

    fn validate(&self) -> Result<()> {
        let s = self.sigma2();
        if !(s >= 0.0) || !s.is_finite() {
            return Err(invalid(format!("sigma2 must be finite and >= 0, got {s}")));
        }
        Ok(())
    }

    /// Conditional scale `s(x)` of the noise at `x`.
    pub fn scale(&self, x: &[f64]) -> f64 {
        let sigma = self.sigma2().sqrt();
        match self {
            Self::Heteroscedastic { .. } => sigma * (0.5 + 0.5 * x[0]),
            _ => sigma,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, x: &[f64]) -> f64 {
        let scale = self.scale(x);
        if scale == 0.0 {
            return 0.0;
        }
        match self {
            Self::BoundedUniform { .. } => scale * (2.0 * rng.random::<f64>() - 1.0),
            _ => {
                let z: f64 = rng.sample(StandardNormal);
                scale * z
            }
        }
    }
}

/// Law of the covariates, supported on `[0,1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovariateLaw {
    UniformCube,
    /// Mixture `b · U[0,1]^d + (1-b) · (density 2 x_1)`; the density
    /// `b + 2(1-b) x_1` ranges over `[b, 2-b]`.
    DensityFloor { b: f64 },
}

impl CovariateLaw {
    fn validate(&self) -> Result<()> {
        if let Self::DensityFloor { b } = *self {
            if !(b > 0.0 && b <= 1.0) {
                return Err(invalid(format!("density floor b must lie in (0,1], got {b}")));
            }
        }
        Ok(())
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        match *self {
            Self::UniformCube => 1.0,
            Self::DensityFloor { b } => b + 2.0 * (1.0 - b) * x[0],
        }
    }

    /// Lower bound `b` of the density on the support.
    pub fn density_floor(&self) -> f64 {
        match *self {
            Self::UniformCube => 1.0,
            Self::DensityFloor { b } => b,
        }
    }

    /// Minimal-mass constant for rectangles: `P(V) >= κ f(x) λ(V)` for
    /// every `x ∈ V`. The density ratio on the support is at most `(2-b)/b`.
    pub fn kappa_rectangles(&self) -> f64 {
        match *self {
            Self::UniformCube => 1.0,
            Self::DensityFloor { b } => b / (2.0 - b),
        }
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = rng.random::<f64>());
        if let Self::DensityFloor { b } = *self {
            if rng.random::<f64>() >= b {
                // inverse CDF of the density 2t on [0,1]
                out[0] = out[0].sqrt();
            }
        }
    }
}

/// Draws `n` iid pairs `Y = g(X) + ε`. Deterministic given `seed`.
pub fn generate(
    law: &CovariateLaw,
    g: &RegressionFunction,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    generate_with(law, g, noise, n, &mut seeded(seed))
}

/// [`generate`] drawing from a caller-provided stream.
pub fn generate_with(
    law: &CovariateLaw,
    g: &RegressionFunction,
    noise: &NoiseModel,
    n: usize,
    rng: &mut StreamRng,
) -> Result<Dataset> {
    law.validate()?;
    noise.validate()?;
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let d = g.dim();
    let mut x = vec![0.0; n * d];
    let mut y = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for row in x.chunks_exact_mut(d) {
        law.sample_into(rng, row);
        let gx = g.eval(row);
        truth.push(gx);
        y.push(gx + noise.sample(rng, row));
    }
    Dataset::new(d, x, y)?.with_truth(truth)
}

fn header(d: usize, with_y: bool) -> Vec<String> {
    let mut h: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    if with_y {
        h.push("y".into());
    }
    h
}

/// Scientific notation with 17 significant digits; parses back bit-exactly.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `x1,...,xd,y` rows.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(ds, BufWriter::new(file))
}

pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(ds.d(), true))?;
    for (row, y) in ds.rows().zip(ds.responses()) {
        w.write_record(row.iter().chain(std::iter::once(y)).map(|&v| fmt_f64(v)))?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

fn parse_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: rec.len(),
            });
        }
        let row = rec
            .iter()
            .map(|field| {
                let v: f64 = field.parse().map_err(|_| Error::Malformed {
                    line,
                    reason: format!("not a number: {field:?}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Malformed {
                        line,
                        reason: format!("non-finite value {field:?}"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(rows)
}

/// Reads a `x1,...,xd,y` file written by [`save_csv`] (or by hand).
pub fn load_csv(path: impl AsRef<Path>, d: usize) -> Result<Dataset> {
    if d == 0 {
        return Err(invalid("d must be >= 1"));
    }
    let rows = parse_rows(path.as_ref(), d + 1)?;
    let mut x = Vec::with_capacity(rows.len() * d);
    let mut y = Vec::with_capacity(rows.len());
    for row in rows {
        x.extend_from_slice(&row[..d]);
        y.push(row[d]);
    }
    Dataset::new(d, x, y)
}

/// Reads query points `x1,...,xd`; a trailing `y` column is ignored.
pub fn load_points(path: impl AsRef<Path>, d: usize) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    match parse_rows(path, d) {
        Err(Error::DimensionMismatch { .. }) => Ok(parse_rows(path, d + 1)?
            .into_iter()
            .map(|mut r| {
                r.truncate(d);
                r
            })
            .collect()),
        other => other,
    }
}
