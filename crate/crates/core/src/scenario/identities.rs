//! Algebraic identities of the local operators, measured on a discretization.

use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::HhoError;
use crate::hho::Discretization;
use crate::materials::{from_components, Sym};
use crate::mesh::Point;
use crate::poly::monomial_exponents;

/// Vector polynomial with seeded random coefficients in every monomial of
/// total degree up to `degree`, centered at `c`.
#[derive(Debug, Clone)]
pub struct SeededPolynomial {
    terms: Vec<((usize, usize), [f64; 2])>,
    center: Point,
}

impl SeededPolynomial {
    pub fn new(degree: usize, seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let terms = monomial_exponents(degree)
            .into_iter()
            .map(|e| (e, [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]))
            .collect();
        SeededPolynomial { terms, center: [0.5, 0.5] }
    }

    pub fn value(&self, x: Point) -> [f64; 2] {
        let (a, b) = (x[0] - self.center[0], x[1] - self.center[1]);
        let mut out = [0.0; 2];
        for &((p, q), c) in &self.terms {
            let m = a.powi(p as i32) * b.powi(q as i32);
            out[0] += c[0] * m;
            out[1] += c[1] * m;
        }
        out
    }

    pub fn sym_grad(&self, x: Point) -> Sym {
        let (a, b) = (x[0] - self.center[0], x[1] - self.center[1]);
        let mut g = [[0.0; 2]; 2];
        for &((p, q), c) in &self.terms {
            let dx = if p > 0 { p as f64 * a.powi(p as i32 - 1) * b.powi(q as i32) } else { 0.0 };
            let dy = if q > 0 { q as f64 * a.powi(p as i32) * b.powi(q as i32 - 1) } else { 0.0 };
            for i in 0..2 {
                g[i][0] += c[i] * dx;
                g[i][1] += c[i] * dy;
            }
        }
        from_components(g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0]))
    }
}

/// Points used to compare polynomials on an element: vertices, the
/// barycenter and the sub-triangle centroids.
pub fn sample_points(disc: &Discretization, t: usize) -> Vec<Point> {
    let el = &disc.mesh.elements[t];
    let mut pts: Vec<Point> = el.vertices.iter().map(|&v| disc.mesh.vertices[v]).collect();
    pts.push(el.barycenter);
    for tri in &el.sub_triangles {
        pts.push([(tri[0][0] + tri[1][0] + tri[2][0]) / 3.0, (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0]);
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorIdentities {
    /// `max |G_T I_T w - grad_s w|` for `w` of degree `k+1`, relative.
    pub commuting: f64,
    /// `max |Delta_TF I_T w|` for `w` of degree `k+1`, relative.
    pub delta_kernel: f64,
    /// `max |r_T I_T w - w|` for `w` of degree `k+1`, relative.
    pub projector: f64,
    /// `|s_T(u, v) - s_T((0, d u), (0, d v))|` on random unknowns, relative.
    pub reformulation: f64,
}

pub fn operator_identities(disc: &Discretization, seed: u64) -> Result<OperatorIdentities, HhoError> {
    let w = SeededPolynomial::new(disc.degree() + 1, seed);
    let iw = disc.reduce(|x| w.value(x))?;
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
    let mut out = OperatorIdentities { commuting: 0.0, delta_kernel: 0.0, projector: 0.0, reformulation: 0.0 };
    for t in 0..disc.mesh.num_elements() {
        let lo = &disc.locals[t];
        let local = disc.local(t, &iw);
        let g = &lo.gradient * &local;
        let r = &lo.reconstruction * &local;
        for x in sample_points(disc, t) {
            let (a, b) = (lo.tensor_at(&g, x), w.sym_grad(x));
            for i in 0..3 {
                out.commuting = out.commuting.max((a[i] - b[i]).abs() / (1.0 + b[i].abs()));
            }
            let (a, b) = (lo.reconstruction_value(&r, x), w.value(x));
            for i in 0..2 {
                out.projector = out.projector.max((a[i] - b[i]).abs() / (1.0 + b[i].abs()));
            }
        }
        let scale = local.amax().max(1.0);
        for d in &lo.residuals {
            out.delta_kernel = out.delta_kernel.max((d * &local).amax() / scale);
        }

        let n = lo.num_local();
        let u = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let lift = |z: &DVector<f64>| {
            let mut o = DVector::zeros(n);
            let bd = lo.boundary_difference(z);
            o.rows_mut(lo.cell_dim(), bd.len()).copy_from(&bd);
            o
        };
        let a = u.dot(&(&lo.stabilization * &v));
        let b = lift(&u).dot(&(&lo.stabilization * lift(&v)));
        let scale = lo.stabilization.amax() * u.norm() * v.norm();
        out.reformulation = out.reformulation.max((a - b).abs() / scale.max(f64::MIN_POSITIVE));
    }
    Ok(out)
}
