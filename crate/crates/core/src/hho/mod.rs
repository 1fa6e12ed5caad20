//! Discrete unknowns, local reconstructions and stabilization.

mod dofs;
mod operators;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::HhoError;
use crate::mesh::{Mesh, Point};
use crate::poly::{
    l2_project_cell, l2_project_face, quadrature_on_element, sym_grad_stiffness, FaceBasis, MAX_BASIS_DEGREE,
};

pub use dofs::DofSpace;
pub(crate) use operators::symeng_unit;
pub use operators::{build_local_operators, LocalOperators};

/// Flat coefficient vector laid out by a [`DofSpace`].
pub type DofVector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhoOptions {
    pub degree: usize,
    /// Quadrature degree for non-polynomial integrands; `2k + 4` if unset.
    pub quad_degree: Option<usize>,
    /// Orthonormalize the local bases; on by default for `k >= 3`.
    pub orthonormal: Option<bool>,
}

impl HhoOptions {
    pub fn new(degree: usize) -> Self {
        HhoOptions { degree, quad_degree: None, orthonormal: None }
    }
}

/// A mesh together with its unknowns and cached local operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub space: DofSpace,
    pub face_bases: Vec<FaceBasis>,
    pub locals: Vec<LocalOperators>,
    pub quad_degree: usize,
    pub orthonormal: bool,
}

impl Discretization {
    pub fn new(mesh: Mesh, opts: HhoOptions) -> Result<Self, HhoError> {
        let k = opts.degree;
        if k == 0 || k + 1 > MAX_BASIS_DEGREE {
            return Err(HhoError::Degree(k));
        }
        let orthonormal = opts.orthonormal.unwrap_or(k >= 3);
        let quad_degree = opts.quad_degree.unwrap_or(2 * k + 4);
        let space = DofSpace::new(&mesh, k);
        let face_bases = mesh
            .faces
            .iter()
            .enumerate()
            .map(|(i, f)| FaceBasis::new(i, f, k, orthonormal))
            .collect::<Result<Vec<_>, _>>()?;
        let locals = (0..mesh.num_elements())
            .into_par_iter()
            .map(|t| {
                build_local_operators(&mesh, &face_bases, space.local_dofs(&mesh, t), t, k, quad_degree, orthonormal)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Discretization { mesh, space, face_bases, locals, quad_degree, orthonormal })
    }

    pub fn degree(&self) -> usize {
        self.space.degree
    }

    pub fn zeros(&self) -> DofVector {
        DofVector::zeros(self.space.dim())
    }

    /// Local unknowns of element `t`.
    pub fn local(&self, t: usize, v: &DofVector) -> DVector<f64> {
        DVector::from_iterator(self.locals[t].dofs.len(), self.locals[t].dofs.iter().map(|&i| v[i]))
    }

    /// Gradient reconstruction coefficients on element `t`.
    pub fn gradient(&self, t: usize, v: &DofVector) -> DVector<f64> {
        &self.locals[t].gradient * self.local(t, v)
    }

    /// Displacement reconstruction coefficients on element `t`.
    pub fn reconstruction(&self, t: usize, v: &DofVector) -> DVector<f64> {
        &self.locals[t].reconstruction * self.local(t, v)
    }

    /// L2 projection of a vector field on all cell and face blocks.
    pub fn reduce<F>(&self, u: F) -> Result<DofVector, HhoError>
    where
        F: Fn(Point) -> [f64; 2] + Sync,
    {
        let mut out = self.zeros();
        let qd = self.quad_degree;
        let cells = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|t| {
                let lo = &self.locals[t];
                let e = &self.mesh.elements[t];
                let a = l2_project_cell(|x| u(x)[0], e, &lo.basis, lo.n_k, qd)?;
                let b = l2_project_cell(|x| u(x)[1], e, &lo.basis, lo.n_k, qd)?;
                Ok((a, b))
            })
            .collect::<Result<Vec<_>, HhoError>>()?;
        for (t, (a, b)) in cells.into_iter().enumerate() {
            let o = self.space.cell_offset(t);
            let n = a.len();
            out.rows_mut(o, n).copy_from(&a);
            out.rows_mut(o + n, n).copy_from(&b);
        }
        for (f, face) in self.mesh.faces.iter().enumerate() {
            let fb = &self.face_bases[f];
            let o = self.space.face_offset(f);
            let n = fb.dim();
            let a = l2_project_face(|x| u(x)[0], face, fb, qd)?;
            let b = l2_project_face(|x| u(x)[1], face, fb, qd)?;
            out.rows_mut(o, n).copy_from(&a);
            out.rows_mut(o + n, n).copy_from(&b);
        }
        Ok(out)
    }

    /// `s_T(u, v)` with scaling `gamma`.
    pub fn stabilization_form(&self, t: usize, u: &DofVector, v: &DofVector, gamma: f64) -> f64 {
        let (ul, vl) = (self.local(t, u), self.local(t, v));
        gamma * ul.dot(&(&self.locals[t].stabilization * vl))
    }

    pub fn stabilization_form_local(&self, t: usize, u: &DVector<f64>, v: &DVector<f64>, gamma: f64) -> f64 {
        gamma * u.dot(&(&self.locals[t].stabilization * v))
    }

    /// `||G_h v||^2` summed over the elements.
    pub fn gradient_norm_squared(&self, v: &DofVector) -> f64 {
        (0..self.mesh.num_elements())
            .map(|t| {
                let lo = &self.locals[t];
                let g = self.gradient(t, v);
                let n = lo.n_k;
                (0..3)
                    .map(|a| {
                        let ga = g.rows(a * n, n);
                        ga.dot(&(&lo.mass_k * ga))
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn stabilization_norm_squared(&self, v: &DofVector, gamma: f64) -> f64 {
        (0..self.mesh.num_elements()).map(|t| self.stabilization_form(t, v, v, gamma)).sum()
    }

    /// Discrete strain seminorm `||v||_{eps,h}`.
    pub fn strain_seminorm(&self, v: &DofVector) -> Result<f64, HhoError> {
        let parts = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|t| {
                let lo = &self.locals[t];
                let e = &self.mesh.elements[t];
                let local = self.local(t, v);
                let k = sym_grad_stiffness(e, &lo.basis, lo.n_k)?;
                let vt = local.rows(0, lo.cell_dim());
                let mut s = vt.dot(&(&k * vt));
                let bd = lo.boundary_difference(&local);
                let kf = lo.face_mass[0].nrows();
                for (i, ef) in e.faces.iter().enumerate() {
                    let hf = self.mesh.faces[ef.face].length;
                    for c in 0..2 {
                        let d = bd.rows(i * 2 * kf + c * kf, kf);
                        s += d.dot(&(&lo.face_mass[i] * d)) / hf;
                    }
                }
                Ok(s)
            })
            .collect::<Result<Vec<f64>, HhoError>>()?;
        Ok(parts.iter().sum::<f64>().sqrt())
    }

    /// Broken L2 norms of the cell displacement and of its full gradient.
    pub fn cell_norms(&self, v: &DofVector) -> Result<(f64, f64), HhoError> {
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for t in 0..self.mesh.num_elements() {
            let lo = &self.locals[t];
            let e = &self.mesh.elements[t];
            let local = self.local(t, v);
            let q = quadrature_on_element(e, 2 * self.degree())?;
            let n = lo.n_k;
            let mut vals = vec![0.0; lo.n_k1];
            let mut grads = vec![[0.0; 2]; lo.n_k1];
            for (x, w) in q.iter() {
                lo.basis.eval_grad(x, &mut vals, &mut grads);
                for c in 0..2 {
                    let (mut val, mut g) = (0.0, [0.0; 2]);
                    for i in 0..n {
                        let a = local[c * n + i];
                        val += a * vals[i];
                        g[0] += a * grads[i][0];
                        g[1] += a * grads[i][1];
                    }
                    l2 += w * val * val;
                    h1 += w * (g[0] * g[0] + g[1] * g[1]);
                }
            }
        }
        Ok((l2.sqrt(), h1.sqrt()))
    }

    /// Value of the cell displacement at `x`, inside element `t`.
    pub fn cell_value(&self, t: usize, v: &DofVector, x: Point) -> [f64; 2] {
        self.locals[t].cell_value(&self.local(t, v), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshKind};

    fn disc(kind: MeshKind, n: usize, k: usize) -> Discretization {
        Discretization::new(generate_mesh(kind, n).unwrap(), HhoOptions::new(k)).unwrap()
    }

    #[test]
    fn rejects_degree_zero() {
        let mesh = generate_mesh(MeshKind::Cartesian, 1).unwrap();
        assert!(matches!(Discretization::new(mesh, HhoOptions::new(0)), Err(HhoError::Degree(0))));
    }

    #[test]
    fn reduce_constant_and_polynomial() {
        let d = disc(MeshKind::NonmatchingRefined, 2, 2);
        let u = d.reduce(|_| [2.0, -1.0]).unwrap();
        for t in 0..d.mesh.num_elements() {
            let v = d.cell_value(t, &u, d.mesh.elements[t].barycenter);
            assert!((v[0] - 2.0).abs() < 1e-13 && (v[1] + 1.0).abs() < 1e-13);
        }
        for (f, face) in d.mesh.faces.iter().enumerate() {
            let o = d.space.face_offset(f);
            let fb = &d.face_bases[f];
            let x = face.point(0.2);
            assert!((fb.evaluate(u.rows(o, 3).as_slice(), x) - 2.0).abs() < 1e-13);
        }
        let p = |x: Point| [x[0] * x[1] - x[1] * x[1], 1.0 + x[0] * x[0]];
        let u = d.reduce(p).unwrap();
        for t in 0..d.mesh.num_elements() {
            let e = &d.mesh.elements[t];
            let x = [
                0.3 * e.barycenter[0] + 0.7 * d.mesh.vertices[e.vertices[0]][0],
                0.3 * e.barycenter[1] + 0.7 * d.mesh.vertices[e.vertices[0]][1],
            ];
            let v = d.cell_value(t, &u, x);
            let ex = p(x);
            assert!((v[0] - ex[0]).abs() < 1e-12 && (v[1] - ex[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn seminorm_examples() {
        let d = disc(MeshKind::Triangular, 2, 1);
        assert_eq!(d.strain_seminorm(&d.zeros()).unwrap(), 0.0);
        let c = d.reduce(|_| [1.5, 0.5]).unwrap();
        assert!(d.strain_seminorm(&c).unwrap() < 1e-12);
        let mut v = d.zeros();
        v[3] = 1.0;
        assert!(d.strain_seminorm(&v).unwrap() > 0.0);
    }

    #[test]
    fn gradient_of_affine_field_is_exact() {
        let d = disc(MeshKind::Triangular, 2, 1);
        let u = d.reduce(|x| [x[1], x[0]]).unwrap();
        for t in 0..d.mesh.num_elements() {
            let g = d.gradient(t, &u);
            let e = d.locals[t].tensor_at(&g, d.mesh.elements[t].barycenter);
            // sym grad (x2, x1) = [[0, 1], [1, 0]]
            assert!(e[0].abs() < 1e-13 && e[1].abs() < 1e-13);
            assert!((e[2] - std::f64::consts::SQRT_2).abs() < 1e-13);
        }
        let z = d.zeros();
        assert!(d.gradient(0, &z).amax() == 0.0);
    }

    #[test]
    fn rigid_rotation_is_reconstructed() {
        for k in 1..=3 {
            let d = disc(MeshKind::NonmatchingRefined, 2, k);
            let u = d.reduce(|x| [-x[1], x[0]]).unwrap();
            for t in 0..d.mesh.num_elements() {
                let lo = &d.locals[t];
                let r = d.reconstruction(t, &u);
                for &vi in &d.mesh.elements[t].vertices {
                    let x = d.mesh.vertices[vi];
                    let v = lo.reconstruction_value(&r, x);
                    assert!((v[0] + x[1]).abs() < 1e-12 && (v[1] - x[0]).abs() < 1e-12, "k {k} t {t}: {v:?}");
                }
            }
        }
    }
}
