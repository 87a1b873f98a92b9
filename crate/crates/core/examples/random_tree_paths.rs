//! Cells of uniform and centered random trees along the path to a point.

use localreg::geometry::AxisBox;
use localreg::random_trees::{grow_path, volume_invariance_check, TreeKind};

fn main() -> localreg::Result<()> {
    let x = [0.3, 0.8];
    for kind in [TreeKind::Uniform, TreeKind::Centered] {
        let (cell, seq) = grow_path(kind, &x, 20, 7)?;
        println!(
            "{kind:?}: sides {:?}, volume {:.3e}, shape ratio {:.2}, product of reductions matches: {}",
            cell.sides(),
            cell.volume(),
            cell.shape_ratio()?,
            volume_invariance_check(&cell, &seq)
        );
        println!("  direction counts {:?}", seq.direction_counts(2));
    }
    Ok(())
}
