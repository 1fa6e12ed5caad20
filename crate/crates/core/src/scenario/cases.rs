//! Built-in manufactured solutions with closed-form derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::materials::{from_components, MaterialLaw, Sym};
use crate::mesh::Point;

/// `grad[i][j] = d u_i / d x_j`, `hess[i][j][l] = d^2 u_i / d x_j d x_l`.
pub type Grad = [[f64; 2]; 2];
pub type Hess = [[[f64; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManufacturedCase {
    /// `u = sin(pi x1) sin(pi x2) (1, 1)`, zero on the unit square boundary.
    HmSine,
    /// `u = x1 x2 (1 - x1)(1 - x2) (1, 1)`.
    Bubble,
    /// `u = (0.1 + 0.3 x1 - 0.2 x2, -0.05 + 0.1 x1 + 0.25 x2)`.
    Affine,
}

impl ManufacturedCase {
    pub fn name(&self) -> &'static str {
        match self {
            ManufacturedCase::HmSine => "hm_sine",
            ManufacturedCase::Bubble => "bubble",
            ManufacturedCase::Affine => "affine",
        }
    }

    /// True when the solution vanishes on the boundary of the unit square.
    pub fn homogeneous(&self) -> bool {
        !matches!(self, ManufacturedCase::Affine)
    }

    pub fn value(&self, x: Point) -> [f64; 2] {
        match self {
            ManufacturedCase::HmSine => {
                let s = (PI * x[0]).sin() * (PI * x[1]).sin();
                [s, s]
            }
            ManufacturedCase::Bubble => {
                let b = x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]);
                [b, b]
            }
            ManufacturedCase::Affine => [0.1 + 0.3 * x[0] - 0.2 * x[1], -0.05 + 0.1 * x[0] + 0.25 * x[1]],
        }
    }

    pub fn grad(&self, x: Point) -> Grad {
        match self {
            ManufacturedCase::HmSine => {
                let (s1, c1) = (PI * x[0]).sin_cos();
                let (s2, c2) = (PI * x[1]).sin_cos();
                let g = [PI * c1 * s2, PI * s1 * c2];
                [g, g]
            }
            ManufacturedCase::Bubble => {
                let g = [x[1] * (1.0 - x[1]) * (1.0 - 2.0 * x[0]), x[0] * (1.0 - x[0]) * (1.0 - 2.0 * x[1])];
                [g, g]
            }
            ManufacturedCase::Affine => [[0.3, -0.2], [0.1, 0.25]],
        }
    }

    pub fn hess(&self, x: Point) -> Hess {
        match self {
            ManufacturedCase::HmSine => {
                let (s1, c1) = (PI * x[0]).sin_cos();
                let (s2, c2) = (PI * x[1]).sin_cos();
                let p2 = PI * PI;
                let h = [[-p2 * s1 * s2, p2 * c1 * c2], [p2 * c1 * c2, -p2 * s1 * s2]];
                [h, h]
            }
            ManufacturedCase::Bubble => {
                let hxx = -2.0 * x[1] * (1.0 - x[1]);
                let hyy = -2.0 * x[0] * (1.0 - x[0]);
                let hxy = (1.0 - 2.0 * x[0]) * (1.0 - 2.0 * x[1]);
                let h = [[hxx, hxy], [hxy, hyy]];
                [h, h]
            }
            ManufacturedCase::Affine => [[[0.0; 2]; 2]; 2],
        }
    }

    /// Exact symmetric gradient in engineering coordinates.
    pub fn sym_grad(&self, x: Point) -> Sym {
        sym_of(&self.grad(x))
    }

    /// `f = -div sigma(grad_s u)` by the chain rule through the law's tangent.
    pub fn load(&self, law: &MaterialLaw, x: Point) -> [f64; 2] {
        let h = self.hess(x);
        let k = law.tangent(&self.sym_grad(x));
        // d sigma / d x_j for j = 1, 2, physical components (s11, s22, s12).
        let ds: Vec<(f64, f64, f64)> = (0..2)
            .map(|j| {
                let de = from_components(h[0][0][j], h[1][1][j], 0.5 * (h[0][1][j] + h[1][0][j]));
                let mut s = [0.0; 3];
                for a in 0..3 {
                    s[a] = (0..3).map(|b| k[a][b] * de[b]).sum();
                }
                crate::materials::to_components(&s)
            })
            .collect();
        let div1 = ds[0].0 + ds[1].2;
        let div2 = ds[0].2 + ds[1].1;
        [-div1, -div2]
    }
}

impl std::str::FromStr for ManufacturedCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "hm_sine" => ManufacturedCase::HmSine,
            "bubble" => ManufacturedCase::Bubble,
            "affine" => ManufacturedCase::Affine,
            _ => return Err(format!("unknown manufactured case `{s}`")),
        })
    }
}

fn sym_of(g: &Grad) -> Sym {
    from_components(g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0]))
}
