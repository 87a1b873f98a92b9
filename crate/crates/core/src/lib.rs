//! Local regression map estimators and shape-regular partitions.

pub mod cli;
pub mod data;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod random_trees;
pub mod rng;
pub mod vc_bounds;

pub use error::{Error, Result};
