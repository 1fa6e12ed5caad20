use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::HhoError;
use crate::hho::Discretization;
use crate::poly::{quadrature_on_element, sym_grad_stiffness};
use crate::solver::{Entry, Factorization};

/// Local matrix of `||v||_{eps,T}^2` on the element unknowns.
pub fn strain_seminorm_matrix(disc: &Discretization, t: usize) -> Result<DMatrix<f64>, HhoError> {
    let lo = &disc.locals[t];
    let el = &disc.mesh.elements[t];
    let nl = lo.num_local();
    let nc = lo.cell_dim();
    let mut b = DMatrix::zeros(nl, nl);
    b.view_mut((0, 0), (nc, nc)).copy_from(&sym_grad_stiffness(el, &lo.basis, lo.n_k)?);
    // Boundary differences as an explicit matrix, one column per unknown.
    let mut d = DMatrix::zeros(nl - nc, nl);
    let mut e = DVector::zeros(nl);
    for j in 0..nl {
        e[j] = 1.0;
        d.set_column(j, &lo.boundary_difference(&e));
        e[j] = 0.0;
    }
    let fd = lo.face_dim();
    let kf = fd / 2;
    let mut w = DMatrix::zeros(nl - nc, nl - nc);
    for (i, ef) in el.faces.iter().enumerate() {
        let hf = disc.mesh.faces[ef.face].length;
        for c in 0..2 {
            let o = i * fd + c * kf;
            w.view_mut((o, o), (kf, kf)).copy_from(&(&lo.face_mass[i] / hf));
        }
    }
    b += d.transpose() * w * d;
    Ok(b)
}

/// Local matrix of `||G_T v||^2 + s_T(v, v)` (unit stabilization scale).
pub fn energy_matrix(disc: &Discretization, t: usize) -> DMatrix<f64> {
    let lo = &disc.locals[t];
    let n = lo.n_k;
    let mut m3 = DMatrix::zeros(3 * n, 3 * n);
    for a in 0..3 {
        m3.view_mut((a * n, a * n), (n, n)).copy_from(&lo.mass_k);
    }
    lo.gradient.transpose() * m3 * &lo.gradient + &lo.stabilization
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEquivalence {
    /// Smallest and largest ratio `(||G v||^2 + s(v, v)) / ||v||_{eps}^2` over
    /// all nonzero local unknowns outside the rigid-motion kernel.
    pub lower: f64,
    pub upper: f64,
}

impl NormEquivalence {
    /// Smallest `eta` with `eta^{-1} <= ratio <= eta`.
    pub fn eta(&self) -> f64 {
        self.upper.max(1.0 / self.lower)
    }
}

/// Element-wise generalized eigenvalue bounds. Both forms are sums of
/// element contributions, so these bound the global ratio.
pub fn norm_equivalence(disc: &Discretization) -> Result<NormEquivalence, HhoError> {
    let bounds = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let b = strain_seminorm_matrix(disc, t)?;
            let a = energy_matrix(disc, t);
            let eig = SymmetricEigen::new(b);
            let top = eig.eigenvalues.amax();
            let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-10 * top).collect();
            let mut wm = DMatrix::zeros(a.nrows(), keep.len());
            for (c, &i) in keep.iter().enumerate() {
                wm.set_column(c, &(eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
            }
            let c = wm.transpose() * a * &wm;
            let ev = SymmetricEigen::new((&c + c.transpose()) * 0.5).eigenvalues;
            Ok((ev.min(), ev.max()))
        })
        .collect::<Result<Vec<(f64, f64)>, HhoError>>()?;
    Ok(NormEquivalence {
        lower: bounds.iter().map(|b| b.0).fold(f64::INFINITY, f64::min),
        upper: bounds.iter().map(|b| b.1).fold(0.0, f64::max),
    })
}

/// Estimate of the discrete Korn constant on the space with all boundary
/// unknowns fixed to zero: the square root of the largest
/// `(||v_h||^2 + ||grad_h v_h||^2) / ||v||_{eps,h}^2`, by inverse-power
/// iteration. This bounds `(||v|| + ||grad v||) / ||v||_eps` within `sqrt 2`.
pub fn korn_constant(disc: &Discretization, iterations: usize) -> Result<f64, HhoError> {
    let space = &disc.space;
    let mut free = vec![usize::MAX; space.dim()];
    let mask = space.boundary_mask();
    let mut n = 0;
    for (i, &b) in mask.iter().enumerate() {
        if !b {
            free[i] = n;
            n += 1;
        }
    }
    let locals = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|t| -> Result<(Vec<Entry>, DMatrix<f64>), HhoError> {
            let lo = &disc.locals[t];
            let b = strain_seminorm_matrix(disc, t)?;
            let mut out = Vec::new();
            for (j, &gj) in lo.dofs.iter().enumerate() {
                for (i, &gi) in lo.dofs.iter().enumerate() {
                    if free[gi] != usize::MAX && free[gj] != usize::MAX {
                        out.push(Entry::new(free[gi], free[gj], b[(i, j)]));
                    }
                }
            }
            // Cell L2 plus broken H1 matrix, per component.
            let nk = lo.n_k;
            let q = quadrature_on_element(&disc.mesh.elements[t], 2 * disc.degree())?;
            let mut h = lo.mass_k.clone();
            let mut vals = vec![0.0; lo.n_k1];
            let mut grads = vec![[0.0; 2]; lo.n_k1];
            for (x, w) in q.iter() {
                lo.basis.eval_grad(x, &mut vals, &mut grads);
                for i in 0..nk {
                    for j in 0..nk {
                        h[(i, j)] += w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    }
                }
            }
            Ok((out, h))
        })
        .collect::<Result<Vec<_>, HhoError>>()?;
    let mut entries = Vec::new();
    let mut cell_blocks = Vec::with_capacity(locals.len());
    for (e, h) in locals {
        entries.extend(e);
        cell_blocks.push(h);
    }
    if n == 0 {
        return Ok(0.0);
    }
    let fact = Factorization::new(n, &entries)?;
    let apply_n = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (t, h) in cell_blocks.iter().enumerate() {
            let nk = h.nrows();
            let o = space.cell_offset(t);
            for c in 0..2 {
                let xs = DVector::from_iterator(nk, (0..nk).map(|i| x[free[o + c * nk + i]]));
                let ys = h * xs;
                for i in 0..nk {
                    y[free[o + c * nk + i]] += ys[i];
                }
            }
        }
        y
    };
    let dotp = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Deterministic start with all modes present.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
    let mut ratio = 0.0;
    for _ in 0..iterations.max(1) {
        let nx = apply_n(&x);
        let y = fact.solve(&nx);
        let norm = dotp(&y, &y).sqrt();
        if !(norm > 0.0) {
            break;
        }
        x = y.iter().map(|v| v / norm).collect();
        let nx = apply_n(&x);
        let mut bx = vec![0.0; n];
        for e in &entries {
            bx[e.row] += e.val * x[e.col];
        }
        ratio = dotp(&x, &nx) / dotp(&x, &bx);
    }
    Ok(ratio.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hho::HhoOptions;
    use crate::mesh::{generate_mesh, MeshKind};

    #[test]
    fn seminorm_matrix_matches_discretization() {
        let d =
            Discretization::new(generate_mesh(MeshKind::NonmatchingRefined, 2).unwrap(), HhoOptions::new(2)).unwrap();
        let u = d.reduce(|x| [x[0] * x[1], (2.0 * x[0]).sin()]).unwrap();
        let mut s = 0.0;
        for t in 0..d.mesh.num_elements() {
            let l = d.local(t, &u);
            s += l.dot(&(strain_seminorm_matrix(&d, t).unwrap() * &l));
        }
        let want = d.strain_seminorm(&u).unwrap();
        assert!((s.sqrt() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn bounds_are_positive_and_ordered() {
        let d = Discretization::new(generate_mesh(MeshKind::Triangular, 2).unwrap(), HhoOptions::new(1)).unwrap();
        let ne = norm_equivalence(&d).unwrap();
        assert!(ne.lower > 0.0 && ne.lower <= 1.0 + 1e-12 && ne.upper >= ne.lower);
        let ck = korn_constant(&d, 30).unwrap();
        assert!(ck.is_finite() && ck > 0.0);
    }
}
