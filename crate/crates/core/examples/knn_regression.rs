//! k-nearest-neighbour regression on noisy data, with the ball each
//! prediction averages over.

use localreg::data::{builtin_g, generate, CovariateLaw, NoiseModel};
use localreg::estimators::{Cell, KnnRegressor, LocalMap, Regressor};
use localreg::experiments::tuning;
use localreg::experiments::EstimatorKind;

fn main() -> localreg::Result<()> {
    let g = builtin_g("sine_product", 2)?;
    let ds = generate(&CovariateLaw::UniformCube, &g, &NoiseModel::gaussian(0.25), 2000, 1)?;
    let k = tuning(EstimatorKind::Knn, ds.n(), ds.d());
    let knn = KnnRegressor::fit(&ds, k)?;
    println!("n = {}, k = {k}", ds.n());
    for x in [[0.25, 0.25], [0.5, 0.5], [0.9, 0.1]] {
        let radius = match knn.cell(&x)? {
            Cell::Ball(b) => b.radius(),
            Cell::Rect(_) => unreachable!(),
        };
        println!("x = {x:?}: estimate {:.4}, truth {:.4}, radius {radius:.4}", knn.predict(&x)?, g.eval(&x));
    }
    Ok(())
}
