//! Scaled polynomial bases, quadrature and L2 projectors on elements and
//! faces.

mod basis;
mod projection;
mod quadrature;

pub use basis::{dim_cell, dim_face, monomial_exponents, CellBasis, FaceBasis, MAX_BASIS_DEGREE};
pub use projection::{
    cell_mass, condition_number, face_mass, l2_project_cell, l2_project_face, local_matrix, sym_grad_stiffness,
    trace_mass, LocalMatrixKind,
};
pub use quadrature::{
    quadrature_on_element, quadrature_on_face, segment_rule, triangle_rule, QuadratureRule, MAX_QUADRATURE_DEGREE,
};
