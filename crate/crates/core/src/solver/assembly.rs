use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{HhoError, LinalgError};
use crate::hho::{Discretization, DofVector};
use crate::materials::MaterialLaw;
use crate::mesh::Point;
use crate::poly::{l2_project_face, quadrature_on_face};

use super::bc::{BcKind, BoundaryConditions};
use super::sparse::{self, Entry, LinearSolver};

const NONE: usize = usize::MAX;

/// Discrete nonlinear problem: discretization, law, loads and boundary
/// conditions.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub disc: &'a Discretization,
    pub law: MaterialLaw,
    /// Load functional: cell part of `int f . v_T` and the Neumann tractions.
    pub load: DofVector,
    /// Global mask of Dirichlet-constrained unknowns.
    pub dirichlet: Vec<bool>,
    /// Dirichlet data on masked unknowns, zero elsewhere.
    pub lift: DofVector,
    /// Faces carrying a traction condition.
    pub neumann_faces: Vec<bool>,
    free_full: Vec<usize>,
    n_free_full: usize,
    free_face: Vec<usize>,
    n_free_face: usize,
}

/// Per-element data kept from the condensation to recover cell unknowns.
struct Recovery {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(
        disc: &'a Discretization,
        law: MaterialLaw,
        bc: &BoundaryConditions,
        f: &(dyn Fn(Point) -> [f64; 2] + Sync),
    ) -> Result<Self, HhoError> {
        let space = &disc.space;
        let mesh = &disc.mesh;
        let conditions = bc.resolve(mesh)?;
        let mut load = disc.zeros();
        let mut lift = disc.zeros();
        let mut dirichlet = vec![false; space.dim()];
        let mut neumann_faces = vec![false; mesh.num_faces()];

        let cells: Vec<DVector<f64>> = (0..mesh.num_elements())
            .into_par_iter()
            .map(|t| {
                let lo = &disc.locals[t];
                let n = lo.n_k;
                let mut out = DVector::zeros(2 * n);
                for (q, (x, w)) in lo.quadrature.iter().enumerate() {
                    let fx = f(x);
                    for i in 0..n {
                        let p = w * lo.phi[(q, i)];
                        out[i] += p * fx[0];
                        out[n + i] += p * fx[1];
                    }
                }
                out
            })
            .collect();
        for (t, c) in cells.into_iter().enumerate() {
            load.rows_mut(space.cell_offset(t), c.len()).copy_from(&c);
        }

        let kf = space.degree + 1;
        for (fid, cond) in conditions.iter().enumerate() {
            let Some(cond) = cond else { continue };
            let face = &mesh.faces[fid];
            let fb = &disc.face_bases[fid];
            let o = space.face_offset(fid);
            match cond.kind {
                BcKind::Dirichlet => {
                    for c in 0..2 {
                        let g = l2_project_face(|x| (cond.value)(x)[c], face, fb, disc.quad_degree)?;
                        lift.rows_mut(o + c * kf, kf).copy_from(&g);
                    }
                    dirichlet[o..o + 2 * kf].iter_mut().for_each(|m| *m = true);
                }
                BcKind::Neumann => {
                    neumann_faces[fid] = true;
                    let q = quadrature_on_face(face, disc.quad_degree)?;
                    let mut v = vec![0.0; kf];
                    for (x, w) in q.iter() {
                        let tr = (cond.value)(x);
                        fb.eval(x, &mut v);
                        for m in 0..kf {
                            load[o + m] += w * tr[0] * v[m];
                            load[o + kf + m] += w * tr[1] * v[m];
                        }
                    }
                }
            }
        }

        let mut free_full = vec![NONE; space.dim()];
        let mut n_free_full = 0;
        for (i, &d) in dirichlet.iter().enumerate() {
            if !d {
                free_full[i] = n_free_full;
                n_free_full += 1;
            }
        }
        let mut free_face = vec![NONE; space.dim()];
        let mut n_free_face = 0;
        for i in space.num_cell_dofs()..space.dim() {
            if !dirichlet[i] {
                free_face[i] = n_free_face;
                n_free_face += 1;
            }
        }
        Ok(Problem { disc, law, load, dirichlet, lift, neumann_faces, free_full, n_free_full, free_face, n_free_face })
    }

    /// Same data with another law.
    pub fn with_law(&self, law: MaterialLaw) -> Self {
        Problem { law, ..self.clone() }
    }

    /// Number of unknowns of the condensed (face) system.
    pub fn condensed_size(&self) -> usize {
        self.n_free_face
    }

    /// Number of unknowns of the full system.
    pub fn full_size(&self) -> usize {
        self.n_free_full
    }

    /// Accumulated `sum_q w phi_q^T sigma_q`, the element's stress moments.
    fn stress_moments(&self, t: usize, g: &DVector<f64>) -> DVector<f64> {
        let lo = &self.disc.locals[t];
        let n = lo.n_k;
        let mut acc = DVector::zeros(3 * n);
        for q in 0..lo.quadrature.len() {
            let w = lo.quadrature.weights[q];
            let s = self.law.stress(&lo.strain_at_qp(g, q));
            for a in 0..3 {
                let ws = w * s[a];
                for i in 0..n {
                    acc[a * n + i] += ws * lo.phi[(q, i)];
                }
            }
        }
        acc
    }

    /// Coefficients of `pi_T^k sigma(G_T u)`.
    pub fn projected_stress(&self, t: usize, local: &DVector<f64>) -> Result<DVector<f64>, HhoError> {
        let lo = &self.disc.locals[t];
        let n = lo.n_k;
        let acc = self.stress_moments(t, &(&lo.gradient * local));
        let chol = lo.mass_k.clone().cholesky().ok_or(LinalgError::Singular { what: "cell mass", element: Some(t) })?;
        let mut out = DVector::zeros(3 * n);
        for a in 0..3 {
            out.rows_mut(a * n, n).copy_from(&chol.solve(&acc.rows(a * n, n).into_owned()));
        }
        Ok(out)
    }

    /// Element residual without the face part of the load.
    pub fn element_residual(&self, t: usize, local: &DVector<f64>) -> DVector<f64> {
        let lo = &self.disc.locals[t];
        let acc = self.stress_moments(t, &(&lo.gradient * local));
        let mut r = lo.gradient.transpose() * acc + self.law.gamma * (&lo.stabilization * local);
        let o = self.disc.space.cell_offset(t);
        for i in 0..lo.cell_dim() {
            r[i] -= self.load[o + i];
        }
        r
    }

    /// Element residual (as above) and tangent matrix.
    pub fn element_system(&self, t: usize, local: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let lo = &self.disc.locals[t];
        let n = lo.n_k;
        let g = &lo.gradient * local;
        let mut acc = DVector::zeros(3 * n);
        let mut kgg = DMatrix::zeros(3 * n, 3 * n);
        for q in 0..lo.quadrature.len() {
            let w = lo.quadrature.weights[q];
            let (s, k) = self.law.stress_tangent(&lo.strain_at_qp(&g, q));
            for a in 0..3 {
                for i in 0..n {
                    let pi = w * lo.phi[(q, i)];
                    acc[a * n + i] += pi * s[a];
                    for b in 0..3 {
                        let kab = pi * k[a][b];
                        if kab == 0.0 {
                            continue;
                        }
                        for j in 0..n {
                            kgg[(a * n + i, b * n + j)] += kab * lo.phi[(q, j)];
                        }
                    }
                }
            }
        }
        let gt = lo.gradient.transpose();
        let mut r = &gt * acc + self.law.gamma * (&lo.stabilization * local);
        let o = self.disc.space.cell_offset(t);
        for i in 0..lo.cell_dim() {
            r[i] -= self.load[o + i];
        }
        let j = gt * kgg * &lo.gradient + self.law.gamma * &lo.stabilization;
        (r, j)
    }

    /// Global residual; Dirichlet rows are zero.
    pub fn residual(&self, u: &DofVector) -> DofVector {
        let disc = self.disc;
        let parts: Vec<DVector<f64>> = (0..disc.mesh.num_elements())
            .into_par_iter()
            .map(|t| self.element_residual(t, &disc.local(t, u)))
            .collect();
        let mut r = disc.zeros();
        let nc = disc.space.num_cell_dofs();
        for i in nc..r.len() {
            r[i] = -self.load[i];
        }
        for (t, p) in parts.iter().enumerate() {
            for (l, &g) in disc.locals[t].dofs.iter().enumerate() {
                r[g] += p[l];
            }
        }
        for (ri, &d) in r.iter_mut().zip(&self.dirichlet) {
            if d {
                *ri = 0.0;
            }
        }
        r
    }

    /// Full Jacobian over the free unknowns as triplets, in free numbering.
    pub fn jacobian_triplets(&self, u: &DofVector) -> Vec<Entry> {
        let disc = self.disc;
        let parts: Vec<Vec<Entry>> = (0..disc.mesh.num_elements())
            .into_par_iter()
            .map(|t| {
                let lo = &disc.locals[t];
                let (_, j) = self.element_system(t, &disc.local(t, u));
                let mut out = Vec::with_capacity(j.len());
                for (b, &gb) in lo.dofs.iter().enumerate() {
                    let cb = self.free_full[gb];
                    if cb == NONE {
                        continue;
                    }
                    for (a, &ga) in lo.dofs.iter().enumerate() {
                        let ra = self.free_full[ga];
                        if ra != NONE {
                            out.push(Entry::new(ra, cb, j[(a, b)]));
                        }
                    }
                }
                out
            })
            .collect();
        parts.concat()
    }

    /// Map between a global vector and the free unknowns of the full system.
    pub fn restrict_free(&self, v: &DofVector) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free_full];
        for (i, &f) in self.free_full.iter().enumerate() {
            if f != NONE {
                out[f] = v[i];
            }
        }
        out
    }

    pub fn extend_free(&self, v: &[f64]) -> DofVector {
        let mut out = self.disc.zeros();
        for (i, &f) in self.free_full.iter().enumerate() {
            if f != NONE {
                out[i] = v[f];
            }
        }
        out
    }

    /// Newton correction from the uncondensed system.
    pub fn full_step(&self, u: &DofVector, solver: LinearSolver) -> Result<DofVector, HhoError> {
        let r = self.residual(u);
        let entries = self.jacobian_triplets(u);
        let rhs: Vec<f64> = self.restrict_free(&r).iter().map(|v| -v).collect();
        let block = self.disc.space.face_dim;
        let x = sparse::solve(self.n_free_full, &entries, &rhs, solver, block)?;
        Ok(self.extend_free(&x))
    }

    /// Newton correction through static condensation of the cell unknowns.
    pub fn condensed_step(&self, u: &DofVector, solver: LinearSolver) -> Result<DofVector, HhoError> {
        let disc = self.disc;
        type Part = (Vec<Entry>, Vec<(usize, f64)>, Recovery);
        let parts: Vec<Part> = (0..disc.mesh.num_elements())
            .into_par_iter()
            .map(|t| -> Result<Part, HhoError> {
                let lo = &disc.locals[t];
                let (r, j) = self.element_system(t, &disc.local(t, u));
                let nc = lo.cell_dim();
                let nf = lo.num_local() - nc;
                let att = j.view((0, 0), (nc, nc)).into_owned();
                let atf = j.view((0, nc), (nc, nf)).into_owned();
                let aft = j.view((nc, 0), (nf, nc));
                let aff = j.view((nc, nc), (nf, nf));
                let lu = att.lu();
                let x = lu.solve(&atf).ok_or(LinalgError::Singular { what: "cell block", element: Some(t) })?;
                let rc = r.rows(0, nc).into_owned();
                let y = lu.solve(&rc).ok_or(LinalgError::Singular { what: "cell block", element: Some(t) })?;
                let schur = aff - aft * &x;
                let rhs = -r.rows(nc, nf) + aft * &y;
                let mut entries = Vec::with_capacity(nf * nf);
                let mut rhs_out = Vec::with_capacity(nf);
                for b in 0..nf {
                    let cb = self.free_face[lo.dofs[nc + b]];
                    if cb == NONE {
                        continue;
                    }
                    rhs_out.push((cb, rhs[b]));
                    for a in 0..nf {
                        let ra = self.free_face[lo.dofs[nc + a]];
                        if ra != NONE {
                            entries.push(Entry::new(ra, cb, schur[(a, b)]));
                        }
                    }
                }
                Ok((entries, rhs_out, Recovery { x, y }))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut rhs = vec![0.0; self.n_free_face];
        let nc_global = disc.space.num_cell_dofs();
        for i in nc_global..disc.space.dim() {
            let f = self.free_face[i];
            if f != NONE {
                rhs[f] += self.load[i];
            }
        }
        let mut entries = Vec::new();
        let mut recovery = Vec::with_capacity(parts.len());
        for (e, r, rec) in parts {
            entries.extend(e);
            for (i, v) in r {
                rhs[i] += v;
            }
            recovery.push(rec);
        }
        let block = disc.space.face_dim;
        let xf = sparse::solve(self.n_free_face, &entries, &rhs, solver, block)?;

        let mut delta = disc.zeros();
        for i in nc_global..disc.space.dim() {
            let f = self.free_face[i];
            if f != NONE {
                delta[i] = xf[f];
            }
        }
        let cells: Vec<DVector<f64>> = recovery
            .par_iter()
            .enumerate()
            .map(|(t, rec)| {
                let lo = &disc.locals[t];
                let nc = lo.cell_dim();
                let df = DVector::from_iterator(lo.num_local() - nc, lo.dofs[nc..].iter().map(|&g| delta[g]));
                -(&rec.y + &rec.x * df)
            })
            .collect();
        for (t, c) in cells.into_iter().enumerate() {
            delta.rows_mut(disc.space.cell_offset(t), c.len()).copy_from(&c);
        }
        Ok(delta)
    }

    pub fn residual_norm(&self, u: &DofVector) -> f64 {
        self.residual(u).norm()
    }
}
