#![allow(dead_code)]

use std::collections::HashMap;

use polyhho::mesh::{generate_mesh, Mesh, MeshKind, Point};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Hexagonal-dominant mesh: the centroid dual of a structured triangulation
/// with slightly perturbed interior vertices.
pub fn hexagonal_mesh(n: usize, seed: u64) -> Mesh {
    let mut rng = StdRng::seed_from_u64(seed);
    let tri = generate_mesh(MeshKind::Triangular, n).unwrap();
    let jitter = 0.15 / n as f64;
    let verts: Vec<Point> = tri
        .vertices
        .iter()
        .map(|&p| {
            let on_boundary = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
            if on_boundary {
                p
            } else {
                [p[0] + rng.random_range(-jitter..jitter), p[1] + rng.random_range(-jitter..jitter)]
            }
        })
        .collect();
    let tris: Vec<[usize; 3]> = tri.elements.iter().map(|e| [e.vertices[0], e.vertices[1], e.vertices[2]]).collect();

    let mut points: Vec<Point> = Vec::new();
    let centroid_id: Vec<usize> = tris
        .iter()
        .map(|t| {
            let c = [
                (verts[t[0]][0] + verts[t[1]][0] + verts[t[2]][0]) / 3.0,
                (verts[t[0]][1] + verts[t[1]][1] + verts[t[2]][1]) / 3.0,
            ];
            points.push(c);
            points.len() - 1
        })
        .collect();
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &tris {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut midpoint_id: HashMap<(usize, usize), usize> = HashMap::new();
    let mut boundary_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); verts.len()];
    for (&(a, b), &c) in &edge_count {
        if c == 1 {
            points.push([(verts[a][0] + verts[b][0]) / 2.0, (verts[a][1] + verts[b][1]) / 2.0]);
            midpoint_id.insert((a, b), points.len() - 1);
            boundary_edges[a].push((a, b));
            boundary_edges[b].push((a, b));
        }
    }
    let mut corner_id: HashMap<usize, usize> = HashMap::new();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for (ti, t) in tris.iter().enumerate() {
        for &v in t {
            incident[v].push(ti);
        }
    }
    let mut cells = Vec::new();
    for v in 0..verts.len() {
        let mut ids: Vec<usize> = incident[v].iter().map(|&t| centroid_id[t]).collect();
        for e in &boundary_edges[v] {
            ids.push(midpoint_id[e]);
        }
        let p = verts[v];
        let is_corner = (p[0] == 0.0 || p[0] == 1.0) && (p[1] == 0.0 || p[1] == 1.0);
        if is_corner {
            let id = *corner_id.entry(v).or_insert_with(|| {
                points.push(p);
                points.len() - 1
            });
            ids.push(id);
        }
        let c = ids.iter().fold([0.0, 0.0], |acc, &i| [acc[0] + points[i][0], acc[1] + points[i][1]]);
        let c = [c[0] / ids.len() as f64, c[1] / ids.len() as f64];
        ids.sort_by(|&a, &b| {
            let ta = (points[a][1] - c[1]).atan2(points[a][0] - c[0]);
            let tb = (points[b][1] - c[1]).atan2(points[b][0] - c[0]);
            ta.partial_cmp(&tb).unwrap()
        });
        cells.push(ids);
    }
    Mesh::from_polygons(points, cells, &[]).unwrap()
}

/// One mesh from each family used by the operator suites.
pub fn mesh_families() -> Vec<(&'static str, Mesh)> {
    vec![
        ("triangular", generate_mesh(MeshKind::Triangular, 3).unwrap()),
        ("cartesian", generate_mesh(MeshKind::Cartesian, 3).unwrap()),
        ("nonmatching", generate_mesh(MeshKind::NonmatchingRefined, 2).unwrap()),
        ("hexagonal", hexagonal_mesh(4, 11)),
    ]
}

/// Random vector polynomial of total degree `degree`.
#[derive(Debug, Clone)]
pub struct RandomPoly {
    pub terms: Vec<(i32, i32, [f64; 2])>,
}

impl RandomPoly {
    pub fn new(rng: &mut StdRng, degree: usize) -> Self {
        let mut terms = Vec::new();
        for d in 0..=degree as i32 {
            for b in 0..=d {
                terms.push((d - b, b, [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]));
            }
        }
        RandomPoly { terms }
    }

    pub fn value(&self, x: Point) -> [f64; 2] {
        let mut v = [0.0; 2];
        for &(a, b, c) in &self.terms {
            let m = x[0].powi(a) * x[1].powi(b);
            v[0] += c[0] * m;
            v[1] += c[1] * m;
        }
        v
    }

    /// Symmetric gradient in engineering coordinates.
    pub fn sym_grad(&self, x: Point) -> [f64; 3] {
        let mut g = [[0.0; 2]; 2];
        for &(a, b, c) in &self.terms {
            let dx = if a > 0 { a as f64 * x[0].powi(a - 1) * x[1].powi(b) } else { 0.0 };
            let dy = if b > 0 { b as f64 * x[0].powi(a) * x[1].powi(b - 1) } else { 0.0 };
            for i in 0..2 {
                g[i][0] += c[i] * dx;
                g[i][1] += c[i] * dy;
            }
        }
        [g[0][0], g[1][1], std::f64::consts::FRAC_1_SQRT_2 * (g[0][1] + g[1][0])]
    }
}

/// Sample points inside element `t`: the barycenter and points pulled
/// towards each vertex.
pub fn sample_points(mesh: &Mesh, t: usize) -> Vec<Point> {
    let e = &mesh.elements[t];
    let c = e.barycenter;
    let mut out = vec![c];
    for &v in &e.vertices {
        let p = mesh.vertices[v];
        out.push([0.4 * c[0] + 0.6 * p[0], 0.4 * c[1] + 0.6 * p[1]]);
    }
    out
}
