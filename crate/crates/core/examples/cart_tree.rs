//! Growing a shape-constrained CART-like tree and auditing its leaves.

use localreg::data::{builtin_g, generate, CovariateLaw, NoiseModel};
use localreg::estimators::{cart_build, tree_predict, CartConfig, CartCost};

fn main() -> localreg::Result<()> {
    let g = builtin_g("sum_coords", 2)?;
    let ds = generate(&CovariateLaw::UniformCube, &g, &NoiseModel::gaussian(0.25), 1000, 2)?;
    let tree = cart_build(&ds, &CartConfig::new(25, 2.0), &CartCost)?;
    println!("{} leaves, depth {}", tree.leaf_count(), tree.max_depth());

    let reports = tree.leaf_reports()?;
    let worst = reports.iter().map(|r| r.beta).fold(1.0, f64::max);
    let smallest = reports.iter().map(|r| r.count).min().unwrap_or(0);
    println!("largest side ratio {worst:.3}, smallest leaf {smallest} points");

    let x = [0.3, 0.7];
    println!("estimate at {x:?}: {:.4} (truth {:.4})", tree_predict(&tree, &ds, &x)?, g.eval(&x));
    for r in reports.iter().take(5) {
        println!("  leaf {:?}..{:?}: {} points, ratio {:.2}", r.lower, r.upper, r.count, r.beta);
    }
    Ok(())
}
