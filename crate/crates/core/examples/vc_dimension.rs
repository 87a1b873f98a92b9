//! Shatter coefficients and brute-force VC dimensions of finite classes.

use localreg::vc_bounds::{sauer_bound, shatter_count, vc_dim_bruteforce, FiniteSetClass};

fn main() -> localreg::Result<()> {
    let intervals = FiniteSetClass::intervals(&[0.0, 0.5, 1.5, 2.5, 3.5]);
    let points = vec![vec![1.0], vec![2.0], vec![3.0]];
    println!(
        "intervals on 3 points: {} patterns, Sauer bound {}",
        shatter_count(&intervals, &points)?,
        sauer_bound(3, 2)
    );
    println!("VC dimension of intervals: {}", vc_dim_bruteforce(&intervals, &points, 3)?);

    let grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let rectangles = FiniteSetClass::rectangles(&grid, 2);
    let pool = vec![
        vec![0.3, 0.55],
        vec![0.55, 0.3],
        vec![0.8, 0.55],
        vec![0.55, 0.8],
        vec![0.55, 0.55],
    ];
    println!("VC dimension of rectangles in the plane: {}", vc_dim_bruteforce(&rectangles, &pool, 5)?);
    Ok(())
}
