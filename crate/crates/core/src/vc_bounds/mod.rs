//! Shattering coefficients, VC dimension and the numeric deviation bounds
//! used by the estimators and the verification harness.

mod bounds;
mod classes;

pub use bounds::*;
pub use classes::{shatter_count, vc_dim_bruteforce, FiniteSetClass, SetShape};
