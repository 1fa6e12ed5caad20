//! Hybrid high-order discretization of linear and nonlinear small-strain
//! elasticity on general polygonal meshes.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod hho;
pub mod materials;
pub mod mesh;
pub mod poly;
pub mod postprocess;
pub mod scenario;
pub mod solver;

pub use error::{HhoError, Result};
