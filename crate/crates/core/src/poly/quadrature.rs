use std::sync::OnceLock;

use crate::error::HhoError;
use crate::mesh::{Element, Face, Point};

/// Highest polynomial degree for which rules are generated.
pub const MAX_QUADRATURE_DEGREE: usize = 60;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` with `n` points.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            if n == 1 {
                dp = 1.0;
            }
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

fn gauss_table(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (1..=MAX_QUADRATURE_DEGREE / 2 + 2).map(gauss_legendre_unit).collect());
    &table[n - 1]
}

fn check(degree: usize) -> Result<(), HhoError> {
    if degree > MAX_QUADRATURE_DEGREE {
        Err(HhoError::QuadratureDegree(degree))
    } else {
        Ok(())
    }
}

/// Gauss rule on a segment, exact for polynomials of the given degree.
pub fn segment_rule(a: Point, b: Point, degree: usize) -> Result<QuadratureRule, HhoError> {
    check(degree)?;
    let n = degree / 2 + 1;
    let (x, w) = gauss_table(n);
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    Ok(QuadratureRule {
        points: x.iter().map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]).collect(),
        weights: w.iter().map(|&wi| wi * len).collect(),
        degree,
    })
}

/// Collapsed-coordinate (Duffy) product rule on a triangle.
pub fn triangle_rule(t: &[Point; 3], degree: usize) -> Result<QuadratureRule, HhoError> {
    check(degree)?;
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), degree };
    push_triangle(&mut rule, t);
    Ok(rule)
}

fn push_triangle(rule: &mut QuadratureRule, t: &[Point; 3]) {
    // The Jacobian (1 - u) raises the degree in u by one.
    let nu = rule.degree.div_ceil(2) + 1;
    let nv = rule.degree / 2 + 1;
    let (xu, wu) = gauss_table(nu);
    let (xv, wv) = gauss_table(nv);
    let e1 = [t[1][0] - t[0][0], t[1][1] - t[0][1]];
    let e2 = [t[2][0] - t[0][0], t[2][1] - t[0][1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    for (&u, &wui) in xu.iter().zip(wu) {
        for (&v, &wvi) in xv.iter().zip(wv) {
            let (xi, eta) = (u, v * (1.0 - u));
            rule.points.push([t[0][0] + xi * e1[0] + eta * e2[0], t[0][1] + xi * e1[1] + eta * e2[1]]);
            rule.weights.push(wui * wvi * (1.0 - u) * jac);
        }
    }
}

/// Composite rule over the element's sub-triangulation.
pub fn quadrature_on_element(element: &Element, degree: usize) -> Result<QuadratureRule, HhoError> {
    check(degree)?;
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), degree };
    for t in &element.sub_triangles {
        push_triangle(&mut rule, t);
    }
    Ok(rule)
}

pub fn quadrature_on_face(face: &Face, degree: usize) -> Result<QuadratureRule, HhoError> {
    segment_rule(face.endpoints[0], face.endpoints[1], degree)
}
