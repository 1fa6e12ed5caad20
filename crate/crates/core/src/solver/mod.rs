//! Global assembly, boundary conditions, static condensation and Newton.

mod assembly;
mod bc;
mod newton;
mod sparse;

pub use assembly::Problem;
pub use bc::{constant_field, BcKind, BoundaryCondition, BoundaryConditions, VectorField};
pub use newton::{newton_solve, newton_solve_from, solve_linear, NewtonOptions, NewtonReport, WarmStart};
pub use sparse::{solve as solve_sparse, Entry, Factorization, LinearSolver};
