use nalgebra::{DMatrix, DVector};

use crate::error::{HhoError, LinalgError};
use crate::mesh::{Element, Face, Point};

use super::basis::{CellBasis, FaceBasis};
use super::quadrature::{quadrature_on_element, quadrature_on_face};

/// Kind of local matrix assembled by [`local_matrix`].
#[derive(Debug, Clone, Copy)]
pub enum LocalMatrixKind<'a> {
    /// `int_T phi_i phi_j` over the first `n` functions of each basis.
    Mass,
    /// `int_F chi_i phi_j` for a face basis against a cell basis.
    TraceMass(&'a Face, &'a FaceBasis),
    /// `int_T grad_s(phi_i e_a) : grad_s(phi_j e_b)` for vector fields.
    SymGradStiffness,
}

/// Cell mass matrix of the first `n` basis functions.
pub fn cell_mass(element: &Element, basis: &CellBasis, n: usize) -> Result<DMatrix<f64>, HhoError> {
    let q = quadrature_on_element(element, 2 * basis.degree)?;
    let mut v = vec![0.0; basis.dim()];
    let mut m = DMatrix::zeros(n, n);
    for (x, w) in q.iter() {
        basis.eval(x, &mut v);
        for j in 0..n {
            let wj = w * v[j];
            for i in j..n {
                m[(i, j)] += wj * v[i];
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    Ok(m)
}

pub fn face_mass(face: &Face, basis: &FaceBasis) -> Result<DMatrix<f64>, HhoError> {
    let n = basis.dim();
    let q = quadrature_on_face(face, 2 * basis.degree)?;
    let mut v = vec![0.0; n];
    let mut m = DMatrix::zeros(n, n);
    for (x, w) in q.iter() {
        basis.eval(x, &mut v);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    Ok(m)
}

/// `int_F chi_i phi_j` with `chi` the face basis and `phi` the first `n`
/// cell basis functions.
pub fn trace_mass(face: &Face, fb: &FaceBasis, cb: &CellBasis, n: usize) -> Result<DMatrix<f64>, HhoError> {
    let q = quadrature_on_face(face, fb.degree + cb.degree)?;
    let mut vf = vec![0.0; fb.dim()];
    let mut vc = vec![0.0; cb.dim()];
    let mut m = DMatrix::zeros(fb.dim(), n);
    for (x, w) in q.iter() {
        fb.eval(x, &mut vf);
        cb.eval(x, &mut vc);
        for j in 0..n {
            for i in 0..fb.dim() {
                m[(i, j)] += w * vf[i] * vc[j];
            }
        }
    }
    Ok(m)
}

/// Symmetric-gradient stiffness of the vector space `P^l(T; R^2)` built from
/// the first `n` scalar functions, ordered component-major.
pub fn sym_grad_stiffness(element: &Element, basis: &CellBasis, n: usize) -> Result<DMatrix<f64>, HhoError> {
    let q = quadrature_on_element(element, 2 * basis.degree.saturating_sub(1))?;
    let mut v = vec![0.0; basis.dim()];
    let mut g = vec![[0.0; 2]; basis.dim()];
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    let mut eps = vec![[0.0; 3]; 2 * n];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for (x, w) in q.iter() {
        basis.eval_grad(x, &mut v, &mut g);
        for i in 0..n {
            let [gx, gy] = g[i];
            eps[i] = [gx, 0.0, r * gy];
            eps[n + i] = [0.0, gy, r * gx];
        }
        for a in 0..2 * n {
            for b in 0..2 * n {
                k[(a, b)] += w * (eps[a][0] * eps[b][0] + eps[a][1] * eps[b][1] + eps[a][2] * eps[b][2]);
            }
        }
    }
    Ok(k)
}

/// Generic entry point over the supported [`LocalMatrixKind`]s. `n` is the
/// number of cell basis functions used.
pub fn local_matrix(
    element: &Element,
    basis: &CellBasis,
    n: usize,
    kind: LocalMatrixKind<'_>,
) -> Result<DMatrix<f64>, HhoError> {
    match kind {
        LocalMatrixKind::Mass => cell_mass(element, basis, n),
        LocalMatrixKind::TraceMass(face, fb) => trace_mass(face, fb, basis, n),
        LocalMatrixKind::SymGradStiffness => sym_grad_stiffness(element, basis, n),
    }
}

/// Spectral condition number of a symmetric matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let ev = m.clone().symmetric_eigen().eigenvalues;
    let max = ev.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min = ev.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    max / min
}

pub(crate) fn spd_solve(
    m: DMatrix<f64>,
    rhs: DVector<f64>,
    what: &'static str,
    element: Option<usize>,
) -> Result<DVector<f64>, HhoError> {
    let chol = m.cholesky().ok_or(LinalgError::Singular { what, element })?;
    Ok(chol.solve(&rhs))
}

/// L2 projection onto the span of the first `n` cell basis functions.
pub fn l2_project_cell(
    f: impl Fn(Point) -> f64,
    element: &Element,
    basis: &CellBasis,
    n: usize,
    quad_degree: usize,
) -> Result<DVector<f64>, HhoError> {
    let q = quadrature_on_element(element, quad_degree)?;
    let mut v = vec![0.0; basis.dim()];
    let mut rhs = DVector::zeros(n);
    for (x, w) in q.iter() {
        basis.eval(x, &mut v);
        let fx = w * f(x);
        for i in 0..n {
            rhs[i] += fx * v[i];
        }
    }
    spd_solve(cell_mass(element, basis, n)?, rhs, "cell mass", Some(basis.element))
}

/// L2 projection onto the face basis.
pub fn l2_project_face(
    f: impl Fn(Point) -> f64,
    face: &Face,
    basis: &FaceBasis,
    quad_degree: usize,
) -> Result<DVector<f64>, HhoError> {
    let q = quadrature_on_face(face, quad_degree)?;
    let n = basis.dim();
    let mut v = vec![0.0; n];
    let mut rhs = DVector::zeros(n);
    for (x, w) in q.iter() {
        basis.eval(x, &mut v);
        let fx = w * f(x);
        for i in 0..n {
            rhs[i] += fx * v[i];
        }
    }
    spd_solve(face_mass(face, basis)?, rhs, "face mass", None)
}
