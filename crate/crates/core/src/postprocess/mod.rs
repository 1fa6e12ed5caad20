//! Error norms, convergence tables, numerical tractions, energies and
//! field export.

mod convergence;
mod errors;
mod export;
mod stability;
mod tractions;

pub use convergence::{convergence_table, ocv, ConvergenceRow, Rate, EXACT_FLOOR};
pub use errors::{energy_error, l2_projection_error, stabilization_candidates, total_energy, StabilizationCandidates};
pub use export::{export_fields, write_vtk, VertexSample};
pub use stability::{energy_matrix, korn_constant, norm_equivalence, strain_seminorm_matrix, NormEquivalence};
pub use tractions::{
    boundary_residuals, equilibrium_report, numerical_tractions, virtual_work_residual, EquilibriumReport,
    TractionField,
};
