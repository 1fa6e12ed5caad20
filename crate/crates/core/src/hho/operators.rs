use nalgebra::{DMatrix, DVector};

use crate::error::{HhoError, LinalgError};
use crate::mesh::{Element, Mesh, Point};
use crate::poly::{
    cell_mass, dim_cell, quadrature_on_element, quadrature_on_face, sym_grad_stiffness, CellBasis, FaceBasis,
    QuadratureRule,
};

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Engineering coordinates of `sym(e_c (x) v)`.
#[inline]
pub(crate) fn symeng_unit(c: usize, v: Point) -> [f64; 3] {
    if c == 0 {
        [v[0], 0.0, R2 * v[1]]
    } else {
        [0.0, v[1], R2 * v[0]]
    }
}

/// Element-local matrices, all acting on the local unknown vector (cell
/// block, then face blocks in element face order).
#[derive(Debug, Clone)]
pub struct LocalOperators {
    /// Basis of `P^{k+1}(T)`; its first `n_k` functions span `P^k(T)`.
    pub basis: CellBasis,
    pub n_k: usize,
    pub n_k1: usize,
    /// Global index of every local unknown.
    pub dofs: Vec<usize>,
    /// Mass matrix of the first `n_k` cell functions.
    pub mass_k: DMatrix<f64>,
    /// Symmetric gradient reconstruction: local unknowns to the coefficients
    /// of a `P^k` tensor field, engineering component-major.
    pub gradient: DMatrix<f64>,
    /// Right-hand side of the gradient reconstruction, so that
    /// `gradient = blockdiag(mass_k)^{-1} gradient_rhs`.
    pub gradient_rhs: DMatrix<f64>,
    /// Displacement reconstruction into `P^{k+1}(T; R^2)`.
    pub reconstruction: DMatrix<f64>,
    /// `Delta_TF` for every face of the element.
    pub residuals: Vec<DMatrix<f64>>,
    /// `sum_F h_F^{-1} Delta_TF^T M_F Delta_TF`, without the `gamma` factor.
    pub stabilization: DMatrix<f64>,
    /// Scalar face mass matrices, per element face.
    pub face_mass: Vec<DMatrix<f64>>,
    /// Face projection of the trace of `P^k(T)` functions, per element face.
    pub trace_projection: Vec<DMatrix<f64>>,
    /// Quadrature rule used for non-polynomial integrands.
    pub quadrature: QuadratureRule,
    /// Values of the first `n_k` basis functions at the quadrature points.
    pub phi: DMatrix<f64>,
}

impl LocalOperators {
    pub fn num_local(&self) -> usize {
        self.dofs.len()
    }

    pub fn cell_dim(&self) -> usize {
        2 * self.n_k
    }

    /// Offset of face block `i` (element face order) in the local vector.
    pub fn face_block(&self, i: usize) -> usize {
        self.cell_dim() + i * (self.face_dim())
    }

    pub fn face_dim(&self) -> usize {
        self.face_mass[0].nrows() * 2
    }

    /// Strain in engineering coordinates at quadrature point `q`, given the
    /// reconstructed gradient coefficients.
    pub fn strain_at_qp(&self, g: &DVector<f64>, q: usize) -> [f64; 3] {
        let n = self.n_k;
        let mut e = [0.0; 3];
        for (a, ea) in e.iter_mut().enumerate() {
            *ea = (0..n).map(|i| self.phi[(q, i)] * g[a * n + i]).sum();
        }
        e
    }

    /// Value at `x` of a tensor field given by `P^k` coefficients.
    pub fn tensor_at(&self, g: &DVector<f64>, x: Point) -> [f64; 3] {
        let mut v = vec![0.0; self.n_k1];
        self.basis.eval(x, &mut v);
        let n = self.n_k;
        let mut e = [0.0; 3];
        for (a, ea) in e.iter_mut().enumerate() {
            *ea = (0..n).map(|i| v[i] * g[a * n + i]).sum();
        }
        e
    }

    /// Value at `x` of the cell displacement of a local vector.
    pub fn cell_value(&self, local: &DVector<f64>, x: Point) -> [f64; 2] {
        let mut v = vec![0.0; self.n_k1];
        self.basis.eval(x, &mut v);
        let n = self.n_k;
        let c0 = (0..n).map(|i| v[i] * local[i]).sum();
        let c1 = (0..n).map(|i| v[i] * local[n + i]).sum();
        [c0, c1]
    }

    /// Value at `x` of a `P^{k+1}` vector field (component-major coefficients).
    pub fn reconstruction_value(&self, r: &DVector<f64>, x: Point) -> [f64; 2] {
        let mut v = vec![0.0; self.n_k1];
        self.basis.eval(x, &mut v);
        let n = self.n_k1;
        [(0..n).map(|i| v[i] * r[i]).sum(), (0..n).map(|i| v[i] * r[n + i]).sum()]
    }

    /// Boundary differences `v_F - v_T|_F` stacked over the element faces.
    pub fn boundary_difference(&self, local: &DVector<f64>) -> DVector<f64> {
        let nf = self.face_mass.len();
        let fd = self.face_dim();
        let kf = fd / 2;
        let n = self.n_k;
        let mut out = DVector::zeros(nf * fd);
        for (i, p) in self.trace_projection.iter().enumerate() {
            let off = self.face_block(i);
            for c in 0..2 {
                let vt = local.rows(c * n, n);
                let tr = p * vt;
                for m in 0..kf {
                    out[i * fd + c * kf + m] = local[off + c * kf + m] - tr[m];
                }
            }
        }
        out
    }
}

fn chol_solve(m: &DMatrix<f64>, b: DMatrix<f64>, what: &'static str, element: usize) -> Result<DMatrix<f64>, HhoError> {
    let chol = m.clone().cholesky().ok_or(LinalgError::Singular { what, element: Some(element) })?;
    Ok(chol.solve(&b))
}

/// Build the local operators of element `t`.
pub fn build_local_operators(
    mesh: &Mesh,
    face_bases: &[FaceBasis],
    dofs: Vec<usize>,
    t: usize,
    degree: usize,
    quad_degree: usize,
    orthonormal: bool,
) -> Result<LocalOperators, HhoError> {
    let k = degree;
    let e: &Element = &mesh.elements[t];
    let basis = CellBasis::new(t, e, k + 1, orthonormal)?;
    let n_k = dim_cell(k);
    let n1 = dim_cell(k + 1);
    let kf = k + 1;
    let nfaces = e.faces.len();
    let ncell = 2 * n_k;
    let nloc = ncell + nfaces * 2 * kf;
    debug_assert_eq!(dofs.len(), nloc);
    let area = e.area;
    let h = e.diameter;

    // Volume terms: Bext[(a,i),(c,j)] = int phi_i sym(e_c (x) grad phi_j)[a]
    // for j < n1, and the constraint rows on the displacement reconstruction.
    let mut bext = DMatrix::zeros(3 * n_k, 2 * n1);
    let mut cons = DMatrix::zeros(3, 2 * n1);
    let mut dcons = DMatrix::zeros(3, nloc);
    let qv = quadrature_on_element(e, 2 * k + 1)?;
    let mut vals = vec![0.0; n1];
    let mut grads = vec![[0.0; 2]; n1];
    for (x, w) in qv.iter() {
        basis.eval_grad(x, &mut vals, &mut grads);
        for j in 0..n1 {
            for c in 0..2 {
                let s = symeng_unit(c, grads[j]);
                for a in 0..3 {
                    if s[a] == 0.0 {
                        continue;
                    }
                    let ws = w * s[a];
                    for i in 0..n_k {
                        bext[(a * n_k + i, c * n1 + j)] += ws * vals[i];
                    }
                }
            }
            let wv = w * vals[j] / area;
            cons[(0, j)] += wv;
            cons[(1, n1 + j)] += wv;
            // (h / |T|) int (d1 r2 - d2 r1)
            cons[(2, j)] -= w * h / area * grads[j][1];
            cons[(2, n1 + j)] += w * h / area * grads[j][0];
        }
    }
    for c in 0..2 {
        for j in 0..n_k {
            dcons[(c, c * n_k + j)] = cons[(c, c * n1 + j)];
        }
    }

    let mut b = DMatrix::zeros(3 * n_k, nloc);
    for c in 0..2 {
        for j in 0..n_k {
            for r in 0..3 * n_k {
                b[(r, c * n_k + j)] = bext[(r, c * n1 + j)];
            }
        }
    }

    let mut face_mass = Vec::with_capacity(nfaces);
    let mut trace_full = Vec::with_capacity(nfaces);
    let mut vf = vec![0.0; kf];
    for (fi, ef) in e.faces.iter().enumerate() {
        let face = &mesh.faces[ef.face];
        let fb = &face_bases[ef.face];
        let n = ef.normal;
        let off = ncell + fi * 2 * kf;
        let q = quadrature_on_face(face, 2 * k + 1)?;
        let mut mf = DMatrix::zeros(kf, kf);
        let mut tfk = DMatrix::zeros(kf, n1);
        for (x, w) in q.iter() {
            basis.eval(x, &mut vals);
            fb.eval(x, &mut vf);
            for m in 0..kf {
                for l in 0..kf {
                    mf[(m, l)] += w * vf[m] * vf[l];
                }
                for j in 0..n1 {
                    tfk[(m, j)] += w * vf[m] * vals[j];
                }
            }
            for c in 0..2 {
                let s = symeng_unit(c, n);
                for a in 0..3 {
                    if s[a] == 0.0 {
                        continue;
                    }
                    let ws = w * s[a];
                    for i in 0..n_k {
                        let wi = ws * vals[i];
                        for j in 0..n_k {
                            b[(a * n_k + i, c * n_k + j)] -= wi * vals[j];
                        }
                        for m in 0..kf {
                            b[(a * n_k + i, off + c * kf + m)] += wi * vf[m];
                        }
                    }
                }
            }
            for m in 0..kf {
                dcons[(2, off + kf + m)] += w * h / area * n[0] * vf[m];
                dcons[(2, off + m)] -= w * h / area * n[1] * vf[m];
            }
        }
        face_mass.push(mf);
        trace_full.push(tfk);
    }

    let mass_k1 = cell_mass(e, &basis, n1)?;
    let mass_k = mass_k1.view((0, 0), (n_k, n_k)).into_owned();

    // G = blockdiag(M_k)^{-1} B
    let chol_k = mass_k.clone().cholesky().ok_or(LinalgError::Singular { what: "cell mass", element: Some(t) })?;
    let mut gradient = DMatrix::zeros(3 * n_k, nloc);
    for a in 0..3 {
        let blk = b.rows(a * n_k, n_k).into_owned();
        gradient.rows_mut(a * n_k, n_k).copy_from(&chol_k.solve(&blk));
    }

    // (S + C^T C) R = N G + C^T D
    let stiff = sym_grad_stiffness(e, &basis, n1)?;
    let lhs = &stiff + cons.transpose() * &cons;
    let rhs = bext.transpose() * &gradient + cons.transpose() * &dcons;
    let reconstruction = chol_solve(&lhs, rhs, "displacement reconstruction", t)?;

    // Pi_T^k of the reconstruction minus the cell unknowns, per component.
    let proj_k = chol_k.solve(&mass_k1.view((0, 0), (n_k, n1)).into_owned());
    let mut cell_diff = Vec::with_capacity(2);
    for c in 0..2 {
        let mut d = &proj_k * reconstruction.rows(c * n1, n1);
        for j in 0..n_k {
            d[(j, c * n_k + j)] -= 1.0;
        }
        cell_diff.push(d);
    }

    let mut residuals = Vec::with_capacity(nfaces);
    let mut trace_projection = Vec::with_capacity(nfaces);
    let mut stabilization = DMatrix::zeros(nloc, nloc);
    for (fi, ef) in e.faces.iter().enumerate() {
        let hf = mesh.faces[ef.face].length;
        let mf = &face_mass[fi];
        let chol_f = mf.clone().cholesky().ok_or(LinalgError::Singular { what: "face mass", element: Some(t) })?;
        let tfk = &trace_full[fi];
        let tk = tfk.columns(0, n_k).into_owned();
        let off = ncell + fi * 2 * kf;
        let mut delta = DMatrix::zeros(2 * kf, nloc);
        for c in 0..2 {
            let inner = tfk * reconstruction.rows(c * n1, n1) - &tk * &cell_diff[c];
            let mut blk = chol_f.solve(&inner);
            for m in 0..kf {
                blk[(m, off + c * kf + m)] -= 1.0;
            }
            delta.rows_mut(c * kf, kf).copy_from(&blk);
            let dm = mf * &blk;
            stabilization += blk.transpose() * dm / hf;
        }
        trace_projection.push(chol_f.solve(&tk));
        residuals.push(delta);
    }
    let stabilization = 0.5 * (&stabilization + stabilization.transpose());

    let quadrature = quadrature_on_element(e, quad_degree)?;
    let mut phi = DMatrix::zeros(quadrature.len(), n_k);
    for (q, &x) in quadrature.points.iter().enumerate() {
        basis.eval(x, &mut vals);
        for i in 0..n_k {
            phi[(q, i)] = vals[i];
        }
    }

    Ok(LocalOperators {
        basis,
        n_k,
        n_k1: n1,
        dofs,
        mass_k,
        gradient,
        gradient_rhs: b,
        reconstruction,
        residuals,
        stabilization,
        face_mass,
        trace_projection,
        quadrature,
        phi,
    })
}
