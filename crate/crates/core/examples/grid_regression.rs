//! Regressogram on a fixed grid, including an empty cell.

use localreg::data::Dataset;
use localreg::estimators::{FixedGrid, GridRegressor, Regressor};

fn main() -> localreg::Result<()> {
    let ds = Dataset::from_rows(
        &[vec![0.1, 0.1], vec![0.2, 0.3], vec![0.7, 0.2], vec![0.8, 0.4]],
        vec![1.0, 2.0, 5.0, 7.0],
    )?;
    let reg = GridRegressor::fit(FixedGrid::uniform(2, 2)?, &ds)?;
    for x in [[0.25, 0.25], [0.75, 0.25], [0.5, 0.9]] {
        println!("x = {x:?}: {} points, estimate {}", reg.count_at(&x)?, reg.predict(&x)?);
    }
    Ok(())
}
