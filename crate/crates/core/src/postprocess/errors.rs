use rayon::prelude::*;

use crate::error::HhoError;
use crate::hho::{Discretization, DofVector};
use crate::materials::{dot, MaterialLaw, Sym};
use crate::mesh::Point;
use crate::poly::{l2_project_cell, quadrature_on_element};

/// `|| grad_s u - G_h u_h ||`, with the exact symmetric gradient given in
/// engineering coordinates.
pub fn energy_error<F>(disc: &Discretization, sym_grad: F, u: &DofVector) -> Result<f64, HhoError>
where
    F: Fn(Point) -> Sym + Sync,
{
    let qd = 2 * (disc.degree() + 1) + 2;
    let parts = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let lo = &disc.locals[t];
            let g = disc.gradient(t, u);
            let q = quadrature_on_element(&disc.mesh.elements[t], qd)?;
            let mut s = 0.0;
            for (x, w) in q.iter() {
                let gh = lo.tensor_at(&g, x);
                let ge = sym_grad(x);
                let d = [ge[0] - gh[0], ge[1] - gh[1], ge[2] - gh[2]];
                s += w * dot(&d, &d);
            }
            Ok(s)
        })
        .collect::<Result<Vec<f64>, HhoError>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `|| pi_h^k u - u_h ||` over the cell unknowns.
pub fn l2_projection_error<F>(disc: &Discretization, exact: F, u: &DofVector) -> Result<f64, HhoError>
where
    F: Fn(Point) -> [f64; 2] + Sync,
{
    let parts = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let lo = &disc.locals[t];
            let e = &disc.mesh.elements[t];
            let n = lo.n_k;
            let o = disc.space.cell_offset(t);
            let mut s = 0.0;
            for c in 0..2 {
                let p = l2_project_cell(|x| exact(x)[c], e, &lo.basis, n, disc.quad_degree)?;
                let d = p - u.rows(o + c * n, n);
                s += d.dot(&(&lo.mass_k * &d));
            }
            Ok(s)
        })
        .collect::<Result<Vec<f64>, HhoError>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// Both readings of the stabilization term of the error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilizationCandidates {
    /// `s_h(u_h, u_h)^{1/2}`.
    pub discrete: f64,
    /// `s_h(I_h u - u_h, I_h u - u_h)^{1/2}`.
    pub error: f64,
}

pub fn stabilization_candidates(
    disc: &Discretization,
    reduced_exact: &DofVector,
    u: &DofVector,
    gamma: f64,
) -> StabilizationCandidates {
    let e = reduced_exact - u;
    StabilizationCandidates {
        discrete: disc.stabilization_norm_squared(u, gamma).max(0.0).sqrt(),
        error: disc.stabilization_norm_squared(&e, gamma).max(0.0).sqrt(),
    }
}

/// Integral of the stored energy of `G_h u` over the domain.
pub fn total_energy(disc: &Discretization, law: &MaterialLaw, u: &DofVector) -> Result<f64, HhoError> {
    let parts = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let lo = &disc.locals[t];
            let g = disc.gradient(t, u);
            let mut s = 0.0;
            for q in 0..lo.quadrature.len() {
                s += lo.quadrature.weights[q] * law.energy(&lo.strain_at_qp(&g, q))?;
            }
            Ok(s)
        })
        .collect::<Result<Vec<f64>, HhoError>>()?;
    Ok(parts.iter().sum())
}
