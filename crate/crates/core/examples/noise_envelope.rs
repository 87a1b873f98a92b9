//! How often the normalised noise supremum over a rectangle class exceeds
//! its envelope.

use localreg::experiments::{sup_envelope, ExperimentConfig, ExperimentKind};

fn main() -> localreg::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SupEnvelope, 11).resolved();
    cfg.replicates = Some(2000);
    cfg.n = vec![300];
    let report = sup_envelope(&cfg)?;
    let row = &report.results[0];
    println!(
        "exceedance frequency {:.4} (se {:.4}) against delta {:.2}: {:?}",
        row.frequency.unwrap_or(f64::NAN),
        row.se.unwrap_or(f64::NAN),
        row.bound.unwrap_or(f64::NAN),
        row.verdict
    );
    Ok(())
}
