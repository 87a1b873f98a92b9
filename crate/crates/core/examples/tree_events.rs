//! Frequency of non-shape-regular cells in deep uniform and centered trees.

use localreg::experiments::{self, ExperimentConfig, ExperimentKind};

fn main() -> localreg::Result<()> {
    for kind in [ExperimentKind::UniformNonSr, ExperimentKind::CenteredNonSr] {
        let mut cfg = ExperimentConfig::new(kind, 9);
        cfg.d = Some(2);
        cfg.splits = Some(50);
        cfg.replicates = Some(5000);
        let report = experiments::run(&cfg)?;
        for row in &report.results {
            println!(
                "{}: frequency {:.4}, floor {:.4}, {:?}",
                row.name,
                row.frequency.unwrap_or(f64::NAN),
                row.bound.unwrap_or(f64::NAN),
                row.verdict
            );
        }
    }
    Ok(())
}
