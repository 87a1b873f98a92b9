//! Mondrian cells at increasing lifetimes and the distribution of their
//! side lengths.

use localreg::experiments::mondrian_side_ks;
use localreg::geometry::AxisBox;
use localreg::random_trees::{mondrian_cell, MondrianParams};

fn main() -> localreg::Result<()> {
    let x = [0.5, 0.5];
    for lifetime in [1.0, 4.0, 16.0, 64.0] {
        let params = MondrianParams::new(lifetime, 2)?;
        let (cell, seq) = mondrian_cell(&params, &x, 3)?;
        println!(
            "lifetime {lifetime:>4}: {:>3} splits, sides {:.4?}, ratio {:.2}",
            seq.len(),
            cell.sides(),
            cell.shape_ratio()?
        );
    }
    let ks = mondrian_side_ks(20.0, 2, 5000, 4)?;
    println!("KS distance of side lengths to min(Gamma(2, 20), 1): {ks:.4}");
    Ok(())
}
