use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HhoError, LinalgError};
use crate::hho::{symeng_unit, Discretization, DofVector};
use crate::materials::dot;
use crate::poly::quadrature_on_face;
use crate::solver::Problem;

fn face_solve(m: &DMatrix<f64>, b: DVector<f64>, element: usize) -> Result<DVector<f64>, HhoError> {
    let chol = m.clone().cholesky().ok_or(LinalgError::Singular { what: "face mass", element: Some(element) })?;
    Ok(chol.solve(&b))
}

/// Boundary residuals `R_TF` of element `t`, one component-major block of
/// face coefficients per element face.
pub fn boundary_residuals(
    disc: &Discretization,
    t: usize,
    local: &DVector<f64>,
    gamma: f64,
) -> Result<Vec<DVector<f64>>, HhoError> {
    let lo = &disc.locals[t];
    let nc = lo.cell_dim();
    let nb = lo.num_local() - nc;
    let delta = lo.boundary_difference(local);
    let sff = lo.stabilization.view((nc, nc), (nb, nb));
    let rhs = -gamma * (sff * delta);
    let fd = lo.face_dim();
    let kf = fd / 2;
    let mut out = Vec::with_capacity(lo.face_mass.len());
    for (i, m) in lo.face_mass.iter().enumerate() {
        let mut r = DVector::zeros(fd);
        for c in 0..2 {
            let b = rhs.rows(i * fd + c * kf, kf).into_owned();
            r.rows_mut(c * kf, kf).copy_from(&face_solve(m, b, t)?);
        }
        out.push(r);
    }
    Ok(out)
}

/// Numerical tractions of every element face, in the face bases.
#[derive(Debug, Clone)]
pub struct TractionField {
    /// `values[t][i]` belongs to face `i` of element `t`.
    pub values: Vec<Vec<DVector<f64>>>,
}

/// `T_TF = -pi_T^k sigma(G_T u) n_TF + R_TF` on every face of element `t`.
/// `flip_normals` reverses the normals of the flux term, for fault
/// injection only.
pub fn numerical_tractions(
    problem: &Problem,
    t: usize,
    local: &DVector<f64>,
    flip_normals: bool,
) -> Result<Vec<DVector<f64>>, HhoError> {
    let disc = problem.disc;
    let lo = &disc.locals[t];
    let el = &disc.mesh.elements[t];
    let stress = problem.projected_stress(t, local)?;
    let mut out = boundary_residuals(disc, t, local, problem.law.gamma)?;
    let kf = lo.face_dim() / 2;
    let sign = if flip_normals { -1.0 } else { 1.0 };
    for (i, ef) in el.faces.iter().enumerate() {
        let face = &disc.mesh.faces[ef.face];
        let fb = &disc.face_bases[ef.face];
        let n = [sign * ef.normal[0], sign * ef.normal[1]];
        let q = quadrature_on_face(face, 2 * disc.degree() + 1)?;
        let mut chi = vec![0.0; kf];
        let mut rhs = DVector::zeros(2 * kf);
        for (x, w) in q.iter() {
            let s = lo.tensor_at(&stress, x);
            fb.eval(x, &mut chi);
            // sigma n as a vector: (s11 n1 + s12 n2, s12 n1 + s22 n2)
            let flux = [dot(&s, &symeng_unit(0, n)), dot(&s, &symeng_unit(1, n))];
            for m in 0..kf {
                rhs[m] += w * flux[0] * chi[m];
                rhs[kf + m] += w * flux[1] * chi[m];
            }
        }
        for c in 0..2 {
            let p = face_solve(&lo.face_mass[i], rhs.rows(c * kf, kf).into_owned(), t)?;
            for m in 0..kf {
                out[i][c * kf + m] -= p[m];
            }
        }
    }
    Ok(out)
}

/// Relative residual of the local principle of virtual work on element `t`,
/// tested against every cell basis function.
pub fn virtual_work_residual(
    problem: &Problem,
    t: usize,
    u: &DofVector,
    tractions: &[DVector<f64>],
) -> Result<f64, HhoError> {
    let disc = problem.disc;
    let lo = &disc.locals[t];
    let el = &disc.mesh.elements[t];
    let local = disc.local(t, u);
    let g = &lo.gradient * &local;
    let n = lo.n_k;
    let mut vals = vec![0.0; lo.n_k1];
    let mut grads = vec![[0.0; 2]; lo.n_k1];
    let mut volume = vec![0.0; 2 * n];
    for (q, (x, w)) in lo.quadrature.iter().enumerate() {
        let s = problem.law.stress(&lo.strain_at_qp(&g, q));
        lo.basis.eval_grad(x, &mut vals, &mut grads);
        for c in 0..2 {
            for i in 0..n {
                volume[c * n + i] += w * dot(&s, &symeng_unit(c, grads[i]));
            }
        }
    }
    let kf = lo.face_dim() / 2;
    let mut surface = vec![0.0; 2 * n];
    let mut chi = vec![0.0; kf];
    for (f, ef) in el.faces.iter().enumerate() {
        let face = &disc.mesh.faces[ef.face];
        let fb = &disc.face_bases[ef.face];
        let q = quadrature_on_face(face, 2 * disc.degree() + 1)?;
        for (x, w) in q.iter() {
            fb.eval(x, &mut chi);
            lo.basis.eval(x, &mut vals);
            let tr: Vec<f64> = (0..2).map(|c| (0..kf).map(|m| tractions[f][c * kf + m] * chi[m]).sum()).collect();
            for c in 0..2 {
                for i in 0..n {
                    surface[c * n + i] += w * tr[c] * vals[i];
                }
            }
        }
    }
    let o = disc.space.cell_offset(t);
    let mut res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..2 * n {
        let f = problem.load[o + j];
        res = res.max((volume[j] + surface[j] - f).abs());
        scale = scale.max(volume[j].abs()).max(surface[j].abs()).max(f.abs());
    }
    Ok(if scale > 0.0 { res / scale } else { res })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumReport {
    /// Largest relative virtual-work residual over the elements.
    pub virtual_work: f64,
    /// Largest relative `|T_1F + T_2F|` over the interfaces.
    pub action_reaction: f64,
    /// Largest mismatch between tractions and applied loads on Neumann
    /// faces, relative to the largest load or traction moment.
    pub neumann: f64,
}

/// Tractions on every element and the equilibrium residuals at `u`.
pub fn equilibrium_report(
    problem: &Problem,
    u: &DofVector,
    flip_normals: bool,
) -> Result<(TractionField, EquilibriumReport), HhoError> {
    let disc = problem.disc;
    let mesh = &disc.mesh;
    let values = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| numerical_tractions(problem, t, &disc.local(t, u), flip_normals))
        .collect::<Result<Vec<_>, HhoError>>()?;
    let vw = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| virtual_work_residual(problem, t, u, &values[t]))
        .collect::<Result<Vec<f64>, HhoError>>()?;
    let virtual_work = vw.into_iter().fold(0.0, f64::max);

    // Per face, (element, local face index) of each side.
    let mut sides: Vec<Vec<(usize, usize)>> = vec![Vec::new(); mesh.num_faces()];
    for (t, el) in mesh.elements.iter().enumerate() {
        for (i, ef) in el.faces.iter().enumerate() {
            sides[ef.face].push((t, i));
        }
    }
    let rel = |d: f64, scale: f64| if scale > 0.0 { d / scale } else { d };
    let mut action_reaction: f64 = 0.0;
    let mut neumann: f64 = 0.0;
    let mut neumann_scale: f64 = 0.0;
    let fd = disc.space.face_dim;
    let kf = fd / 2;
    for (f, s) in sides.iter().enumerate() {
        if let [(t1, i1), (t2, i2)] = s[..] {
            let (a, b) = (&values[t1][i1], &values[t2][i2]);
            action_reaction = action_reaction.max(rel((a + b).amax(), a.amax().max(b.amax())));
        } else if problem.neumann_faces[f] {
            // Moments of T against the face basis must cancel the load moments.
            let (t, i) = s[0];
            let m = &disc.locals[t].face_mass[i];
            let tr = &values[t][i];
            let mut moments = DVector::zeros(fd);
            for c in 0..2 {
                moments.rows_mut(c * kf, kf).copy_from(&(m * tr.rows(c * kf, kf)));
            }
            let load = problem.load.rows(disc.space.face_offset(f), fd);
            neumann = neumann.max((&moments + load).amax());
            neumann_scale = neumann_scale.max(load.amax()).max(moments.amax());
        }
    }
    let neumann = rel(neumann, neumann_scale);
    Ok((TractionField { values }, EquilibriumReport { virtual_work, action_reaction, neumann }))
}
