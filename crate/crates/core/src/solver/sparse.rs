use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::LinalgError;

pub type Entry = Triplet<usize, usize, f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Sparse LU factorization.
    Direct,
    /// Conjugate gradients with a block-Jacobi preconditioner; only valid for
    /// symmetric positive definite systems.
    Cg { tol: f64, max_iter: usize },
}

fn build(n: usize, entries: &[Entry]) -> Result<SparseColMat<usize, f64>, LinalgError> {
    SparseColMat::try_new_from_triplets(n, n, entries).map_err(|e| LinalgError::Factorization(format!("{e:?}")))
}

/// Solve the `n x n` system given by (summed) triplets.
pub fn solve(
    n: usize,
    entries: &[Entry],
    rhs: &[f64],
    solver: LinearSolver,
    block: usize,
) -> Result<Vec<f64>, LinalgError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = build(n, entries)?;
    match solver {
        LinearSolver::Direct => {
            let lu = a.sp_lu().map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
            let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
            let x = lu.solve(&b);
            let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
            if out.iter().all(|v| v.is_finite()) {
                Ok(out)
            } else {
                Err(LinalgError::Singular { what: "global", element: None })
            }
        }
        LinearSolver::Cg { tol, max_iter } => pcg(&a, rhs, block, tol, max_iter),
    }
}

/// A sparse LU factorization kept for repeated solves.
pub struct Factorization {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl Factorization {
    pub fn new(n: usize, entries: &[Entry]) -> Result<Self, LinalgError> {
        let lu = build(n, entries)?.sp_lu().map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
        Ok(Factorization { n, lu })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

fn matvec(a: &SparseColMat<usize, f64>, x: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    let sym = a.symbolic();
    let vals = a.val();
    for j in 0..a.ncols() {
        let xj = x[j];
        let range = sym.col_range(j);
        for (p, &i) in range.clone().zip(sym.row_idx()[range].iter()) {
            y[i] += vals[p] * xj;
        }
    }
}

fn pcg(
    a: &SparseColMat<usize, f64>,
    b: &[f64],
    block: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    let block = block.max(1);
    // Dense inverses of the diagonal blocks.
    let nb = n.div_ceil(block);
    let mut blocks: Vec<nalgebra::DMatrix<f64>> = (0..nb)
        .map(|k| {
            let s = (n - k * block).min(block);
            nalgebra::DMatrix::zeros(s, s)
        })
        .collect();
    let sym = a.symbolic();
    for j in 0..n {
        let range = sym.col_range(j);
        for (p, &i) in range.clone().zip(sym.row_idx()[range].iter()) {
            if i / block == j / block {
                blocks[j / block][(i % block, j % block)] += a.val()[p];
            }
        }
    }
    let inv: Vec<nalgebra::DMatrix<f64>> = blocks
        .into_iter()
        .map(|m| m.try_inverse().ok_or(LinalgError::Singular { what: "preconditioner block", element: None }))
        .collect::<Result<_, _>>()?;
    let precond = |r: &[f64], z: &mut [f64]| {
        for (k, m) in inv.iter().enumerate() {
            let o = k * block;
            for i in 0..m.nrows() {
                z[o + i] = (0..m.ncols()).map(|j| m[(i, j)] * r[o + j]).sum();
            }
        }
    };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        matvec(a, &p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LinalgError::NoConvergence { iterations: max_iter, residual: dot(&r, &r).sqrt() / bnorm })
}
