use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Mesh, Point};
use crate::error::MeshError;

/// Structured mesh families of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    /// `n x n` squares, each split along its rising diagonal.
    Triangular,
    Cartesian,
    /// `n x n` squares whose upper-right quadrant is refined once more,
    /// leaving hanging nodes on the quadrant border.
    NonmatchingRefined,
}

impl FromStr for MeshKind {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triangular" => Ok(MeshKind::Triangular),
            "cartesian" => Ok(MeshKind::Cartesian),
            "nonmatching_refined" => Ok(MeshKind::NonmatchingRefined),
            other => Err(MeshError::UnsupportedKind(other.to_string())),
        }
    }
}

pub fn generate_mesh(kind: MeshKind, resolution: usize) -> Result<Mesh, MeshError> {
    let n = resolution;
    if n == 0 {
        return Err(MeshError::BadResolution);
    }
    match kind {
        MeshKind::Triangular => {
            let (v, id) = lattice(n);
            let mut cells = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
            Mesh::from_polygons(v, cells, &[])
        }
        MeshKind::Cartesian => {
            let (v, id) = lattice(n);
            let mut cells = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
            Mesh::from_polygons(v, cells, &[])
        }
        MeshKind::NonmatchingRefined => {
            // Vertices live on the lattice of step 1/(2n); coarse cells list
            // their four corners only and pick up hanging nodes at build time.
            let m = 2 * n;
            let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
            let mut vertices: Vec<Point> = Vec::new();
            let mut vid = |i: usize, j: usize| -> usize {
                *ids.entry((i, j)).or_insert_with(|| {
                    vertices.push([i as f64 / m as f64, j as f64 / m as f64]);
                    vertices.len() - 1
                })
            };
            let mut cells = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let (i2, j2) = (2 * i, 2 * j);
                    if 2 * i >= n && 2 * j >= n {
                        for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                            let (a, b) = (i2 + di, j2 + dj);
                            cells.push(vec![vid(a, b), vid(a + 1, b), vid(a + 1, b + 1), vid(a, b + 1)]);
                        }
                    } else {
                        cells.push(vec![vid(i2, j2), vid(i2 + 2, j2), vid(i2 + 2, j2 + 2), vid(i2, j2 + 2)]);
                    }
                }
            }
            Mesh::from_polygons(vertices, cells, &[])
        }
    }
}

fn lattice(n: usize) -> (Vec<Point>, impl Fn(usize, usize) -> usize) {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    (v, move |i: usize, j: usize| j * (n + 1) + i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_counts() {
        assert_eq!(generate_mesh(MeshKind::Triangular, 1).unwrap().num_elements(), 2);
        assert_eq!(generate_mesh(MeshKind::Cartesian, 2).unwrap().num_elements(), 4);
        assert_eq!(generate_mesh(MeshKind::NonmatchingRefined, 2).unwrap().num_elements(), 7);
        assert!(matches!(generate_mesh(MeshKind::Cartesian, 0), Err(MeshError::BadResolution)));
        assert!("voronoi".parse::<MeshKind>().is_err());
    }

    #[test]
    fn nonmatching_has_split_edges() {
        let m = generate_mesh(MeshKind::NonmatchingRefined, 2).unwrap();
        // Some element owns two faces on one straight edge.
        let found = m.elements.iter().any(|e| {
            e.faces.windows(2).any(|w| {
                let (a, b) = (&m.faces[w[0].face], &m.faces[w[1].face]);
                w[0].normal == w[1].normal && (a.tangent == b.tangent || a.tangent == [-b.tangent[0], -b.tangent[1]])
            })
        });
        assert!(found);
        assert!(m.elements.iter().any(|e| e.faces.len() == 5));
    }
}
