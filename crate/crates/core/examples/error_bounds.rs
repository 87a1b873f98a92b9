//! Evaluating the finite-sample error bounds for a given sample size.

use localreg::vc_bounds::{cart_bound, knn_bound, large_sample_threshold, pointwise_bound, BoundSpec};

fn main() -> localreg::Result<()> {
    let (n, d, delta, sigma2) = (10_000u64, 2usize, 0.05, 0.25);
    let spec = BoundSpec::new(n, delta, 2 * d as u32, sigma2)?.with_mass(1.0, 1.0).with_lipschitz(1.0);
    println!("large-sample threshold: n P(A) >= {:.1}", large_sample_threshold(n, 2 * d as u32, delta)?);
    println!("pointwise bound, 100 points in a cell of diameter 0.1: {:.4}", pointwise_bound(&spec, 100, 1.0, 0.1)?);
    for k in [50u64, 200, 800] {
        println!("k-NN, k = {k}: {:.4}", knn_bound(&spec, d, k)?);
    }
    for m in [50u64, 200, 800] {
        println!("CART-like, m = {m}, beta = 2: {:.4}", cart_bound(&spec, d, m, 2.0)?);
    }
    Ok(())
}
