//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines reach stdout.
//! Exits non-zero when a criterion fails unless it is listed in
//! `KNOWN_FAILURES` together with the reason it cannot pass.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use localreg::data::Dataset;
use localreg::estimators::{cart_build, knn_predict, CartConfig, CartCost, KnnRegressor, PartitionTree, Regressor};
use localreg::experiments::{self, EstimatorKind, ExperimentConfig, ExperimentKind, ExperimentReport};
use localreg::geometry::{AxisBox, HyperRectangle};
use localreg::random_trees::{grow_path, TreeKind};
use localreg::rng::stream_rng;
use localreg::vc_bounds::{vc_dim_bruteforce, FiniteSetClass};

const SEED: u64 = 20_240_601;

/// Criteria whose target statement is false as posed.
///
/// 3: the upper-tail bounds for the diameter and the volume of uniform-tree
/// cells assume the volume of the cell containing a fixed point is
/// distributed as a product of uniforms. The piece kept at each split
/// contains the point and is therefore length-biased (density `2s`, mean
/// log `-1/2` instead of `-1`), so cells are much larger than the bounds
/// allow. The volume-invariance experiment reports both laws.
const KNOWN_FAILURES: &[usize] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> localreg::Result<Outcome>;

fn outcome(pass: bool, detail: impl Into<String>) -> localreg::Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn failing_rows(report: &ExperimentReport) -> String {
    let bad: Vec<String> = report
        .results
        .iter()
        .filter(|r| !r.verdict.passed())
        .map(|r| {
            let value = r.frequency.or(r.statistic).or(r.slope).unwrap_or(f64::NAN);
            let limit = r.bound.or(r.target).unwrap_or(f64::NAN);
            format!("{} ({value:.4} vs {limit:.4})", r.name)
        })
        .collect();
    if bad.is_empty() {
        "all rows pass".into()
    } else {
        format!("failing rows: {}", bad.join(", "))
    }
}

fn run_kind(kind: ExperimentKind, edit: impl FnOnce(&mut ExperimentConfig)) -> localreg::Result<ExperimentReport> {
    let mut cfg = ExperimentConfig::new(kind, SEED);
    edit(&mut cfg);
    experiments::run(&cfg)
}

fn volume_invariance() -> localreg::Result<Outcome> {
    let report = run_kind(ExperimentKind::VolumeInvariance, |c| {
        c.dims = vec![1, 2, 5];
        c.replicates = Some(10_000);
        c.splits = Some(50);
    })?;
    let rows: Vec<_> = report.results.iter().filter(|r| r.name.starts_with("invariance/")).collect();
    let pass = rows.len() == 6 && rows.iter().all(|r| r.verdict.passed() && r.frequency == Some(1.0));
    outcome(pass, format!("{} path families, 10^4 paths each, identity to 1e-12", rows.len()))
}

fn centered_volume() -> localreg::Result<Outcome> {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = stream_rng(SEED, "centered_volume", seed);
        let d = rng.random_range(1..=5usize);
        let n = (seed % 31) as usize;
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let (cell, _) = grow_path(TreeKind::Centered, &x, n, seed)?;
        let exact = 2f64.powi(-(n as i32));
        worst = worst.max((cell.volume() - exact).abs());
    }
    outcome(worst == 0.0, format!("max |volume - 2^-N| = {worst:e} over 100 seeds"))
}

fn deviation_envelopes() -> localreg::Result<Outcome> {
    let report = run_kind(ExperimentKind::EventFrequency, |c| {
        c.d = Some(2);
        c.splits = Some(50);
        c.replicates = Some(10_000);
    })?;
    outcome(report.passed(), failing_rows(&report))
}

fn non_sr_floors() -> localreg::Result<Outcome> {
    let mut details = Vec::new();
    let mut pass = true;
    for kind in [ExperimentKind::UniformNonSr, ExperimentKind::CenteredNonSr] {
        let report = run_kind(kind, |c| {
            c.d = Some(2);
            c.splits = Some(50);
            c.replicates = Some(10_000);
        })?;
        let row = &report.results[0];
        pass &= report.passed();
        details.push(format!(
            "{} {:.4} >= {:.4}",
            row.name,
            row.frequency.unwrap_or(f64::NAN),
            row.bound.unwrap_or(f64::NAN)
        ));
    }
    outcome(pass, details.join(", "))
}

fn mondrian_shape() -> localreg::Result<Outcome> {
    let report = run_kind(ExperimentKind::MondrianRatio, |c| {
        c.d = Some(2);
        c.lifetime = Some(10.0);
        c.delta = Some(0.1);
        c.replicates = Some(10_000);
    })?;
    let row = report.row("mondrian_ratio").expect("ratio row");
    outcome(
        row.verdict.passed(),
        format!(
            "frequency {:.4} >= {:.4} - 3SE",
            row.frequency.unwrap_or(f64::NAN),
            row.bound.unwrap_or(f64::NAN)
        ),
    )
}

fn sup_envelope() -> localreg::Result<Outcome> {
    let report = run_kind(ExperimentKind::SupEnvelope, |c| {
        c.class_size = Some(50);
        c.n = vec![500];
        c.sigma2 = Some(1.0);
        c.delta = Some(0.05);
        c.replicates = Some(10_000);
    })?;
    let row = &report.results[0];
    outcome(
        report.passed(),
        format!("exceedance {:.4} <= 0.05 + 3SE", row.frequency.unwrap_or(f64::NAN)),
    )
}

fn rate_exponents() -> localreg::Result<Outcome> {
    let mut details = Vec::new();
    let mut pass = true;
    for (d, estimators) in [
        (1, vec![EstimatorKind::Knn, EstimatorKind::Cart, EstimatorKind::Grid]),
        (2, vec![EstimatorKind::Knn, EstimatorKind::Cart]),
    ] {
        let report = run_kind(ExperimentKind::RateCurve, |c| {
            c.d = Some(d);
            c.n = vec![1_000, 3_000, 10_000, 30_000, 100_000];
            c.sigma2 = Some(0.25);
            c.g = Some("sum_coords".into());
            c.replicates = Some(50);
            c.estimators = estimators;
        })?;
        pass &= report.passed();
        for row in &report.results {
            details.push(format!(
                "{} {:.3} (target {:.3})",
                row.name,
                row.slope.unwrap_or(f64::NAN),
                row.target.unwrap_or(f64::NAN)
            ));
        }
    }
    outcome(pass, details.join(", "))
}

fn lower_bound_mechanism() -> localreg::Result<Outcome> {
    let report = run_kind(ExperimentKind::LowerBoundProbe, |c| {
        c.d = Some(2);
        c.n = vec![10_000];
        c.gamma_bars = vec![1.0, 10.0, 100.0];
        c.replicates = Some(10_000);
    })?;
    let inc = report.row("rmse_increasing").expect("monotonicity row");
    let oracle = report.row("cube_oracle").expect("oracle row");
    let rmse: Vec<String> = inc.values.iter().map(|(k, v)| format!("{k}: {v:.4}")).collect();
    outcome(
        inc.verdict.passed() && oracle.verdict.passed(),
        format!(
            "RMSE {}, cube {:.4} vs oracle {:.4}",
            rmse.join(", "),
            oracle.statistic.unwrap_or(f64::NAN),
            oracle.target.unwrap_or(f64::NAN)
        ),
    )
}

// ---- oracle equivalences ----

/// Mean response of the `k` points nearest to `x`, by a full sort on
/// `(squared distance, index)`.
fn knn_full_sort(ds: &Dataset, x: &[f64], k: usize) -> f64 {
    let mut ranked: Vec<(f64, usize)> = (0..ds.n())
        .map(|i| {
            let d2: f64 = ds.row(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let y = ds.responses();
    ranked[..k].iter().map(|&(_, i)| y[i]).sum::<f64>() / k as f64
}

fn random_dataset(rng: &mut impl Rng, n: usize, d: usize, lattice: Option<f64>) -> Dataset {
    let snap = |v: f64| match lattice {
        Some(step) => (v / step).round() * step,
        None => v,
    };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| snap(rng.random::<f64>())).collect()).collect();
    let y = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
    Dataset::from_rows(&rows, y).expect("valid sample")
}

fn within_mse(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
}

/// Best root split by enumerating every partition of the sample that a cut
/// of some coordinate can produce. Returns `(cost, p, left index set)`.
fn exhaustive_root_split(ds: &Dataset, m: usize, beta: f64) -> Option<(f64, usize, Vec<usize>)> {
    let (n, d) = (ds.n(), ds.d());
    // Children of the unit cube cut at u have sides u and 1 - u along p and
    // 1 elsewhere; both are β-SR iff u lies in [1/β, 1 - 1/β] (any u if d = 1).
    let (lo, hi) = if d == 1 { (0.0, 1.0) } else { (1.0 / beta, 1.0 - 1.0 / beta) };
    let y = ds.responses();
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for p in 0..d {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| ds.row(i)[p].total_cmp(&ds.row(j)[p]));
        for c in 1..n {
            let (a, b) = (ds.row(order[c - 1])[p], ds.row(order[c])[p]);
            // thresholds t in [a, b) put exactly the first c points left
            let t = a.max(lo);
            if a == b || t >= b || t > hi {
                continue;
            }
            if c < m || n - c < m {
                continue;
            }
            let left: Vec<f64> = order[..c].iter().map(|&i| y[i]).collect();
            let right: Vec<f64> = order[c..].iter().map(|&i| y[i]).collect();
            let cost = within_mse(&left) + within_mse(&right);
            if best.as_ref().map_or(true, |b| cost < b.0) {
                let mut set = order[..c].to_vec();
                set.sort_unstable();
                best = Some((cost, p, set));
            }
        }
    }
    best
}

fn oracle_equivalences() -> localreg::Result<Outcome> {
    let mut rng = stream_rng(SEED, "oracles", 0);
    let mut knn_queries = 0;
    for dataset in 0..20 {
        let d = 1 + dataset % 3;
        let n = rng.random_range(50..400);
        // every fourth sample sits on a coarse lattice to force distance ties
        let lattice = (dataset % 4 == 0).then_some(0.125);
        let ds = random_dataset(&mut rng, n, d, lattice);
        let k = rng.random_range(1..=n.min(40));
        let reg = KnnRegressor::fit(&ds, k)?;
        for _ in 0..200 {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let want = knn_full_sort(&ds, &x, k);
            if knn_predict(&ds, &x, k)? != want || reg.predict(&x)? != want {
                return outcome(false, format!("k-NN mismatch on dataset {dataset}"));
            }
            knn_queries += 1;
        }
    }

    let mut splits = 0;
    for dataset in 0..20 {
        let d = 1 + dataset % 3;
        let n = rng.random_range(10..=50);
        let lattice = (dataset % 3 == 0).then_some(1.0 / 16.0);
        let ds = random_dataset(&mut rng, n, d, lattice);
        let m = rng.random_range(1..=n / 4);
        let beta = [2.0, 3.0, 5.0][dataset % 3];
        let tree = cart_build(&ds, &CartConfig::new(m, beta), &CartCost)?;
        let got = root_partition(&tree, &ds);
        let want = exhaustive_root_split(&ds, m, beta);
        match (got, want) {
            (None, None) => {}
            (Some((p, left)), Some((_, q, set))) if p == q && left == set => splits += 1,
            (got, want) => {
                return outcome(
                    false,
                    format!(
                        "first split differs on dataset {dataset}: tree {:?}, enumeration {:?}",
                        got.map(|g| g.0),
                        want.map(|w| (w.0, w.1))
                    ),
                )
            }
        }
    }
    outcome(
        true,
        format!("{knn_queries} k-NN queries exact, {splits} nontrivial first splits out of 20 match"),
    )
}

/// Root split coordinate and the indices sent left, if the root was split.
fn root_partition(tree: &PartitionTree, ds: &Dataset) -> Option<(usize, Vec<usize>)> {
    let spec = tree.split_of(0)?;
    let (l, _) = tree.children(0)?;
    let t = tree.node_cell(l).upper()[spec.p];
    let left = (0..ds.n()).filter(|&i| ds.row(i)[spec.p] <= t).collect();
    Some((spec.p, left))
}

// ---- structural invariants ----

fn structural_invariants() -> localreg::Result<Outcome> {
    let mut rng = stream_rng(SEED, "structure", 0);
    let mut trees = 0;
    let mut leaves = 0;
    for case in 0..12 {
        let d = 1 + case % 3;
        let n = rng.random_range(300..2_000);
        let ds = random_dataset(&mut rng, n, d, None);
        let m = rng.random_range(1..=40);
        let beta = [2.0, 2.5, 4.0][case % 3];
        let tree = cart_build(&ds, &CartConfig::new(m, beta), &CartCost)?;
        for id in 0..tree.node_count() {
            if !tree.node_cell(id).is_beta_sr(beta)? {
                return outcome(false, format!("cell {id} of tree {case} is not {beta}-SR"));
            }
        }
        let mut volume = 0.0;
        for id in tree.leaves() {
            if tree.depth(id) > 0 && tree.leaf_indices(id).len() < m {
                return outcome(false, format!("leaf {id} of tree {case} holds fewer than m = {m} points"));
            }
            volume += tree.node_cell(id).volume();
            leaves += 1;
        }
        if (volume - 1.0).abs() > 1e-12 {
            return outcome(false, format!("leaf volumes of tree {case} sum to {volume}"));
        }
        let cells: Vec<(usize, HyperRectangle)> = tree.leaves().map(|id| (id, tree.node_cell(id).clone())).collect();
        for q in 0..500 {
            let x: Vec<f64> = match q {
                // corners and faces are where half-open conventions break
                0 => vec![0.0; d],
                1 => vec![1.0; d],
                _ => (0..d).map(|_| [rng.random::<f64>(), 0.5, 0.25][rng.random_range(0..3)]).collect(),
            };
            let owners: Vec<usize> = cells.iter().filter(|(_, c)| c.contains(&x)).map(|(id, _)| *id).collect();
            if owners != [tree.locate_leaf(&x)?] {
                return outcome(false, format!("query {x:?} lies in leaves {owners:?} of tree {case}"));
            }
        }
        trees += 1;
    }
    outcome(true, format!("{trees} trees, {leaves} leaves: shape, mass and tiling hold"))
}

fn vc_sanity() -> localreg::Result<Outcome> {
    let pts = |v: &[&[f64]]| -> Vec<Vec<f64>> { v.iter().map(|p| p.to_vec()).collect() };

    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let intervals = vc_dim_bruteforce(
        &FiniteSetClass::intervals(&grid),
        &pts(&[&[0.15], &[0.35], &[0.55], &[0.75], &[0.95]]),
        4,
    )?;

    let grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let rectangles = vc_dim_bruteforce(
        &FiniteSetClass::rectangles(&grid, 2),
        &pts(&[
            &[0.5, 0.8],
            &[0.2, 0.5],
            &[0.8, 0.5],
            &[0.5, 0.2],
            &[0.45, 0.55],
            &[0.7, 0.7],
            &[0.3, 0.35],
        ]),
        5,
    )?;

    let centers: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let radii: Vec<f64> = (1..=12).map(|i| i as f64 / 20.0).collect();
    let balls = vc_dim_bruteforce(
        &FiniteSetClass::balls(&centers, &radii, 2),
        &pts(&[
            &[0.3, 0.3],
            &[0.7, 0.3],
            &[0.5, 0.65],
            &[0.5, 0.45],
            &[0.1, 0.9],
            &[0.9, 0.85],
        ]),
        4,
    )?;
    outcome(
        (intervals, rectangles, balls) == (2, 4, 3),
        format!("intervals {intervals}, rectangles {rectangles}, balls {balls}"),
    )
}

fn determinism() -> localreg::Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| localreg::Error::Io {
        path: std::env::temp_dir(),
        source: e,
    })?;
    let runs: &[&[&str]] = &[
        &["verify", "--experiment", "prop6_4", "--d", "2", "--N", "50", "--R", "10000"],
        &["verify", "--experiment", "event_frequency", "--R", "2000"],
        &["verify", "--experiment", "mondrian_ratio", "--R", "2000"],
        &["verify", "--experiment", "sup_envelope", "--R", "500"],
        &["rates", "--d", "2", "--n", "200,400,800,1600", "--R", "8"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            let report = dir.path().join(format!("report_{i}_{threads}.json"));
            let raw = dir.path().join(format!("raw_{i}_{threads}.csv"));
            let mut argv: Vec<String> = vec!["localreg".into()];
            argv.extend(args.iter().map(|s| s.to_string()));
            argv.extend(
                ["--seed", "7", "--threads", threads, "--out", report.to_str().unwrap(), "--raw", raw.to_str().unwrap()]
                    .map(String::from),
            );
            let code = localreg::cli::run(argv);
            if code == 2 {
                return outcome(false, format!("`{}` exited with a usage error", args.join(" ")));
            }
            outputs.push((fs::read(&report).unwrap_or_default(), fs::read(&raw).unwrap_or_default()));
        }
        if outputs[0] != outputs[1] || outputs[0].0.is_empty() {
            return outcome(false, format!("`{}` differs between 1 and 8 threads", args.join(" ")));
        }
    }
    outcome(true, format!("{} commands byte-identical at --threads 1 and 8", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, f64, Check); 12] = [
        (1, "volume invariance", 10.0, volume_invariance),
        (2, "centered volume", 1.0, centered_volume),
        (3, "deviation envelopes", 60.0, deviation_envelopes),
        (4, "non-shape-regularity floors", 30.0, non_sr_floors),
        (5, "Mondrian shape bound", 60.0, mondrian_shape),
        (6, "uniform noise envelope", 120.0, sup_envelope),
        (7, "rate exponents", 1800.0, rate_exponents),
        (8, "elongated-cell mechanism", 300.0, lower_bound_mechanism),
        (9, "oracle equivalences", 30.0, oracle_equivalences),
        (10, "structural invariants", 30.0, structural_invariants),
        (11, "VC sanity", 60.0, vc_sanity),
        (12, "determinism", f64::INFINITY, determinism),
    ];
    // `cargo test --test acceptance -- 7 9` runs a subset.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, title, limit, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && secs < limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = if limit.is_finite() {
            format!("{secs:.1}s, limit {limit:.0}s")
        } else {
            format!("{secs:.1}s")
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        let known = if !pass && KNOWN_FAILURES.contains(&id) { " [known failure]" } else { "" };
        println!("{tag} criterion {id:>2} {title}: {detail} ({timing}){known}");
        if !pass && known.is_empty() {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
