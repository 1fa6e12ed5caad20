use nalgebra::DMatrix;

use crate::error::{HhoError, LinalgError};
use crate::mesh::{Element, Face, Point};

use super::quadrature::{quadrature_on_element, quadrature_on_face};

/// Dimension of `P^l` in two variables.
pub const fn dim_cell(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Dimension of `P^l` on a segment.
pub const fn dim_face(l: usize) -> usize {
    l + 1
}

/// Exponents of the two-variable monomials, ordered by total degree.
pub fn monomial_exponents(l: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_cell(l));
    for d in 0..=l {
        for j in 0..=d {
            out.push((d - j, j));
        }
    }
    out
}

/// Replace the monomials `m` by `phi = C m` with `C` lower triangular, so
/// that `int phi_i phi_j = |X| delta_ij`. The triangular structure keeps the
/// basis hierarchical.
fn orthonormalize(mass: DMatrix<f64>, measure: f64, element: Option<usize>) -> Result<DMatrix<f64>, HhoError> {
    let n = mass.nrows();
    let chol = (mass / measure).cholesky().ok_or(LinalgError::Singular { what: "basis mass", element })?;
    let l = chol.l();
    let mut c = DMatrix::<f64>::identity(n, n);
    if !l.solve_lower_triangular_mut(&mut c) {
        return Err(LinalgError::Singular { what: "basis mass", element }.into());
    }
    Ok(c)
}

/// Scaled monomials `((x - x_T) / h_T)^alpha` on an element, possibly
/// orthonormalized.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub degree: usize,
    pub element: usize,
    pub center: Point,
    pub scale: f64,
    pub exponents: Vec<(usize, usize)>,
    coeffs: Option<DMatrix<f64>>,
}

impl CellBasis {
    pub fn monomial(element_id: usize, element: &Element, degree: usize) -> Self {
        assert!(degree <= MAX_BASIS_DEGREE, "basis degree {degree} too high");
        CellBasis {
            degree,
            element: element_id,
            center: element.barycenter,
            scale: element.diameter,
            exponents: monomial_exponents(degree),
            coeffs: None,
        }
    }

    pub fn new(element_id: usize, element: &Element, degree: usize, orthonormal: bool) -> Result<Self, HhoError> {
        let mut b = Self::monomial(element_id, element, degree);
        if orthonormal {
            let q = quadrature_on_element(element, 2 * degree)?;
            let n = b.dim();
            let mut mass = DMatrix::zeros(n, n);
            let mut v = vec![0.0; n];
            for (x, w) in q.iter() {
                b.eval(x, &mut v);
                for i in 0..n {
                    for j in 0..=i {
                        mass[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            mass.fill_upper_triangle_with_lower_triangle();
            b.coeffs = Some(orthonormalize(mass, element.area, Some(element_id))?);
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.coeffs.is_some()
    }

    fn powers(&self, x: Point) -> ([f64; 32], [f64; 32]) {
        let xi = (x[0] - self.center[0]) / self.scale;
        let eta = (x[1] - self.center[1]) / self.scale;
        let mut px = [1.0; 32];
        let mut py = [1.0; 32];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    /// Values of all basis functions at `x`.
    pub fn eval(&self, x: Point, out: &mut [f64]) {
        let (px, py) = self.powers(x);
        match &self.coeffs {
            None => {
                for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
                    *o = px[a] * py[b];
                }
            }
            Some(c) => {
                let n = self.dim();
                let mut m = [0.0; 528];
                for (k, &(a, b)) in self.exponents.iter().enumerate() {
                    m[k] = px[a] * py[b];
                }
                for i in 0..n {
                    out[i] = (0..=i).map(|j| c[(i, j)] * m[j]).sum();
                }
            }
        }
    }

    /// Values and gradients of all basis functions at `x`.
    pub fn eval_grad(&self, x: Point, vals: &mut [f64], grads: &mut [[f64; 2]]) {
        let (px, py) = self.powers(x);
        let n = self.dim();
        let h = self.scale;
        let mono = |k: usize| {
            let (a, b) = self.exponents[k];
            let gx = if a > 0 { a as f64 * px[a - 1] * py[b] / h } else { 0.0 };
            let gy = if b > 0 { b as f64 * px[a] * py[b - 1] / h } else { 0.0 };
            (px[a] * py[b], [gx, gy])
        };
        match &self.coeffs {
            None => {
                for k in 0..n {
                    let (v, g) = mono(k);
                    vals[k] = v;
                    grads[k] = g;
                }
            }
            Some(c) => {
                for i in 0..n {
                    vals[i] = 0.0;
                    grads[i] = [0.0; 2];
                }
                for j in 0..n {
                    let (v, g) = mono(j);
                    for i in j..n {
                        let cij = c[(i, j)];
                        vals[i] += cij * v;
                        grads[i][0] += cij * g[0];
                        grads[i][1] += cij * g[1];
                    }
                }
            }
        }
    }

    /// Evaluate the polynomial with the given coefficients (first entries only).
    pub fn evaluate(&self, coeffs: &[f64], x: Point) -> f64 {
        let mut v = vec![0.0; self.dim()];
        self.eval(x, &mut v);
        coeffs.iter().zip(&v).map(|(c, v)| c * v).sum()
    }
}

/// Monomials `s^j` in the face coordinate `s = (x - x_F) . tau / h_F`.
#[derive(Debug, Clone)]
pub struct FaceBasis {
    pub degree: usize,
    pub face: usize,
    pub midpoint: Point,
    pub tangent: Point,
    pub scale: f64,
    coeffs: Option<DMatrix<f64>>,
}

impl FaceBasis {
    pub fn monomial(face_id: usize, face: &Face, degree: usize) -> Self {
        assert!(degree <= MAX_BASIS_DEGREE, "basis degree {degree} too high");
        FaceBasis {
            degree,
            face: face_id,
            midpoint: face.midpoint,
            tangent: face.tangent,
            scale: face.length,
            coeffs: None,
        }
    }

    pub fn new(face_id: usize, face: &Face, degree: usize, orthonormal: bool) -> Result<Self, HhoError> {
        let mut b = Self::monomial(face_id, face, degree);
        if orthonormal {
            let q = quadrature_on_face(face, 2 * degree)?;
            let n = b.dim();
            let mut mass = DMatrix::zeros(n, n);
            let mut v = vec![0.0; n];
            for (x, w) in q.iter() {
                b.eval(x, &mut v);
                mass += w * nalgebra::DVector::from_column_slice(&v) * nalgebra::RowDVector::from_row_slice(&v);
            }
            b.coeffs = Some(orthonormalize(mass, face.length, None)?);
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn coordinate(&self, x: Point) -> f64 {
        ((x[0] - self.midpoint[0]) * self.tangent[0] + (x[1] - self.midpoint[1]) * self.tangent[1]) / self.scale
    }

    pub fn eval(&self, x: Point, out: &mut [f64]) {
        let s = self.coordinate(x);
        let mut p = 1.0;
        let n = self.dim();
        let mut m = [0.0; 32];
        for mj in m.iter_mut().take(n) {
            *mj = p;
            p *= s;
        }
        match &self.coeffs {
            None => out[..n].copy_from_slice(&m[..n]),
            Some(c) => {
                for i in 0..n {
                    out[i] = (0..=i).map(|j| c[(i, j)] * m[j]).sum();
                }
            }
        }
    }

    pub fn evaluate(&self, coeffs: &[f64], x: Point) -> f64 {
        let mut v = vec![0.0; self.dim()];
        self.eval(x, &mut v);
        coeffs.iter().zip(&v).map(|(c, v)| c * v).sum()
    }
}

/// Largest degree the fixed-size scratch buffers support.
pub const MAX_BASIS_DEGREE: usize = 30;
