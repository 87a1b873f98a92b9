//! Empirical convergence rate of rate-tuned k-NN in one dimension.

use localreg::experiments::{self, EstimatorKind, ExperimentConfig, ExperimentKind};

fn main() -> localreg::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::RateCurve, 5);
    cfg.d = Some(1);
    cfg.n = vec![250, 500, 1000, 2000, 4000];
    cfg.replicates = Some(20);
    cfg.estimators = vec![EstimatorKind::Knn];
    let report = experiments::run(&cfg)?;
    for row in &report.results {
        for p in &row.curve {
            println!("n = {:>5}: median sup error {:.4}", p.n, p.median_sup_error);
        }
        println!("{}: slope {:.3} against {:.3} ({:?})", row.name, row.slope.unwrap_or(f64::NAN), row.target.unwrap_or(f64::NAN), row.verdict);
    }
    Ok(())
}
