//! Two-dimensional polygonal meshes with first-class faces.
//!
//! Elements are simple counter-clockwise polygons. Faces are straight
//! segments partitioning the mesh skeleton; an element edge that carries
//! hanging nodes of its neighbours is split into several faces, so a coarse
//! element can own more faces than it has geometric edges.

mod generate;
mod io;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::MeshError;

pub use generate::{generate_mesh, MeshKind};
pub use io::{parse_mesh, read_mesh, write_mesh};

pub type Point = [f64; 2];

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * cross(sub(b, a), sub(c, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Interface,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Face {
    /// Vertex ids; the face is oriented from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    pub endpoints: [Point; 2],
    pub length: f64,
    pub midpoint: Point,
    /// Unit tangent from the first to the second endpoint.
    pub tangent: Point,
    /// Unit normal pointing out of `elements[0]`.
    pub normal: Point,
    pub kind: FaceKind,
    /// First entry is the element that sees `normal` as outward.
    pub elements: [usize; 2],
    pub tag: Option<String>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.kind == FaceKind::Boundary
    }

    /// Elements adjacent to the face (one for boundary faces).
    pub fn neighbours(&self) -> &[usize] {
        match self.kind {
            FaceKind::Boundary => &self.elements[..1],
            FaceKind::Interface => &self.elements[..],
        }
    }

    /// Point at local coordinate `s` in `[-1/2, 1/2]`.
    pub fn point(&self, s: f64) -> Point {
        [self.midpoint[0] + s * self.length * self.tangent[0], self.midpoint[1] + s * self.length * self.tangent[1]]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ElementFace {
    pub face: usize,
    /// Outward unit normal n_TF.
    pub normal: Point,
}

#[derive(Debug, Clone)]
pub struct Element {
    /// Counter-clockwise vertex ids, hanging nodes included.
    pub vertices: Vec<usize>,
    pub diameter: f64,
    pub area: f64,
    pub barycenter: Point,
    /// Quadrature sub-triangulation (the element itself for triangles,
    /// otherwise a fan from the barycenter).
    pub sub_triangles: Vec<[Point; 3]>,
    pub faces: Vec<ElementFace>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    /// Lower-left and upper-right corners of the bounding box.
    pub bbox: [Point; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    pub min_inradius_ratio: f64,
    pub max_faces_per_element: usize,
    pub max_face_ratio: f64,
    pub min_subdiameter_ratio: f64,
}

/// Edge of a cell used while building: vertex ids plus geometric data.
struct Bucketing {
    origin: Point,
    size: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl Bucketing {
    fn new(points: &[Point], used: &[bool], bbox: [Point; 2]) -> Self {
        let n = used.iter().filter(|u| **u).count().max(1);
        let ext = (bbox[1][0] - bbox[0][0]).max(bbox[1][1] - bbox[0][1]);
        let per_side = ((n as f64).sqrt().ceil() as usize).clamp(1, 4096);
        let size = (ext / per_side as f64).max(f64::MIN_POSITIVE);
        let nx = (((bbox[1][0] - bbox[0][0]) / size) as usize + 1).min(4097);
        let ny = (((bbox[1][1] - bbox[0][1]) / size) as usize + 1).min(4097);
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut this = Self { origin: bbox[0], size, nx, ny, buckets: Vec::new() };
        for (i, p) in points.iter().enumerate() {
            if used[i] {
                let (bx, by) = this.cell(*p);
                buckets[by * nx + bx].push(i);
            }
        }
        this.buckets = buckets;
        this
    }

    fn cell(&self, p: Point) -> (usize, usize) {
        let fx = ((p[0] - self.origin[0]) / self.size).floor();
        let fy = ((p[1] - self.origin[1]) / self.size).floor();
        let bx = if fx.is_finite() && fx > 0.0 { (fx as usize).min(self.nx - 1) } else { 0 };
        let by = if fy.is_finite() && fy > 0.0 { (fy as usize).min(self.ny - 1) } else { 0 };
        (bx, by)
    }

    fn query(&self, lo: Point, hi: Point, out: &mut Vec<usize>) {
        out.clear();
        let (x0, y0) = self.cell(lo);
        let (x1, y1) = self.cell(hi);
        for by in y0..=y1 {
            for bx in x0..=x1 {
                out.extend_from_slice(&self.buckets[by * self.nx + bx]);
            }
        }
    }
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

impl Mesh {
    /// Builds topology and geometry from raw polygons.
    ///
    /// `tags` lists boundary faces by their endpoint vertex ids. Untagged
    /// boundary faces on a side of the bounding box are tagged
    /// `bottom`/`top`/`left`/`right`, any other boundary face `boundary`.
    pub fn from_polygons(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        tags: &[(usize, usize, String)],
    ) -> Result<Mesh, MeshError> {
        if vertices.is_empty() || cells.is_empty() {
            return Err(MeshError::Topology("mesh has no vertices or no cells".into()));
        }
        if let Some(i) = vertices.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(MeshError::Parse { line: 0, msg: format!("vertex {i} has a non-finite coordinate") });
        }
        let nv = vertices.len();
        let mut used = vec![false; nv];
        for (e, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::InvalidElement { element: e, msg: format!("{} vertices", cell.len()) });
            }
            for &v in cell {
                if v >= nv {
                    return Err(MeshError::InvalidElement { element: e, msg: format!("vertex id {v} out of range") });
                }
                used[v] = true;
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::InvalidElement { element: e, msg: "repeated vertex".into() });
            }
        }

        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (p, _) in vertices.iter().zip(&used).filter(|(_, u)| **u) {
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        let diam = dist(lo, hi);
        if !(diam > 0.0) || !diam.is_finite() {
            return Err(MeshError::Topology("degenerate bounding box".into()));
        }
        let tol = 1e-12 * diam;

        // Duplicate vertices: sweep in x.
        let mut order: Vec<usize> = (0..nv).filter(|&i| used[i]).collect();
        order.sort_by(|&a, &b| vertices[a][0].total_cmp(&vertices[b][0]));
        for (n, &i) in order.iter().enumerate() {
            for &j in &order[n + 1..] {
                if vertices[j][0] - vertices[i][0] > tol {
                    break;
                }
                if (vertices[j][1] - vertices[i][1]).abs() <= tol {
                    return Err(MeshError::DuplicateVertex { a: i.min(j), b: i.max(j) });
                }
            }
        }

        let grid = Bucketing::new(&vertices, &used, [lo, hi]);
        let mut candidates = Vec::new();
        let mut elements = Vec::with_capacity(cells.len());
        for (e, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let signed: f64 = (0..n).map(|i| cross(vertices[cell[i]], vertices[cell[(i + 1) % n]])).sum::<f64>() * 0.5;
            if !(signed > 0.0) {
                return Err(MeshError::Orientation { element: e });
            }
            for i in 0..n {
                let (a, b) = (vertices[cell[i]], vertices[cell[(i + 1) % n]]);
                for j in i + 2..n {
                    if i == 0 && j == n - 1 {
                        continue;
                    }
                    let (c, d) = (vertices[cell[j]], vertices[cell[(j + 1) % n]]);
                    if segments_cross(a, b, c, d) {
                        return Err(MeshError::InvalidElement { element: e, msg: "polygon is not simple".into() });
                    }
                }
            }

            // Insert hanging nodes lying on the element edges.
            let mut augmented = Vec::with_capacity(n);
            for i in 0..n {
                let (ia, ib) = (cell[i], cell[(i + 1) % n]);
                let (a, b) = (vertices[ia], vertices[ib]);
                augmented.push(ia);
                let ab = sub(b, a);
                let len = ab[0].hypot(ab[1]);
                if len <= tol {
                    return Err(MeshError::InvalidElement { element: e, msg: "zero-length edge".into() });
                }
                let qlo = [a[0].min(b[0]) - tol, a[1].min(b[1]) - tol];
                let qhi = [a[0].max(b[0]) + tol, a[1].max(b[1]) + tol];
                grid.query(qlo, qhi, &mut candidates);
                let mut on_edge: Vec<(f64, usize)> = candidates
                    .iter()
                    .filter(|&&v| v != ia && v != ib)
                    .filter_map(|&v| {
                        let ap = sub(vertices[v], a);
                        let t = (ap[0] * ab[0] + ap[1] * ab[1]) / (len * len);
                        let off = cross(ab, ap).abs() / len;
                        (off <= tol && t * len > tol && (1.0 - t) * len > tol).then_some((t, v))
                    })
                    .collect();
                on_edge.sort_by(|x, y| x.0.total_cmp(&y.0));
                augmented.extend(on_edge.into_iter().map(|(_, v)| v));
            }
            elements.push(build_element(e, augmented, &vertices)?);
        }

        // Faces from augmented edges.
        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, elem) in elements.iter_mut().enumerate() {
            let n = elem.vertices.len();
            for i in 0..n {
                let (a, b) = (elem.vertices[i], elem.vertices[(i + 1) % n]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let d = sub(pb, pa);
                        let length = d[0].hypot(d[1]);
                        let tangent = [d[0] / length, d[1] / length];
                        let normal = [tangent[1], -tangent[0]];
                        lookup.insert(key, faces.len());
                        elem.faces.push(ElementFace { face: faces.len(), normal });
                        faces.push(Face {
                            vertices: [a, b],
                            endpoints: [pa, pb],
                            length,
                            midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                            tangent,
                            normal,
                            kind: FaceKind::Boundary,
                            elements: [e, usize::MAX],
                            tag: None,
                        });
                    }
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.kind == FaceKind::Interface {
                            return Err(MeshError::Topology(format!(
                                "face between vertices {a} and {b} shared by more than two elements"
                            )));
                        }
                        if face.vertices[0] != b {
                            return Err(MeshError::Topology(format!(
                                "elements {} and {e} traverse the edge {a}-{b} in the same direction",
                                face.elements[0]
                            )));
                        }
                        face.kind = FaceKind::Interface;
                        face.elements[1] = e;
                        let normal = [-face.normal[0], -face.normal[1]];
                        elem.faces.push(ElementFace { face: f, normal });
                    }
                }
            }
        }

        // Every boundary vertex must close a loop.
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for f in faces.iter().filter(|f| f.is_boundary()) {
            *degree.entry(f.vertices[0]).or_default() += 1;
            *degree.entry(f.vertices[1]).or_default() += 1;
        }
        if let Some((v, _)) = degree.iter().find(|(_, d)| **d % 2 == 1) {
            return Err(MeshError::Topology(format!(
                "boundary is not closed at vertex {v} (nonmatching edge not detected?)"
            )));
        }

        for (a, b, tag) in tags {
            let f = lookup
                .get(&((*a).min(*b), (*a).max(*b)))
                .copied()
                .ok_or_else(|| MeshError::Topology(format!("tagged face {a}-{b} does not exist")))?;
            if !faces[f].is_boundary() {
                return Err(MeshError::Topology(format!("tagged face {a}-{b} is not a boundary face")));
            }
            faces[f].tag = Some(tag.clone());
        }
        for f in faces.iter_mut().filter(|f| f.is_boundary() && f.tag.is_none()) {
            let [p, q] = f.endpoints;
            let on = |c: usize, v: f64| (p[c] - v).abs() <= tol && (q[c] - v).abs() <= tol;
            let tag = if on(1, lo[1]) {
                "bottom"
            } else if on(1, hi[1]) {
                "top"
            } else if on(0, lo[0]) {
                "left"
            } else if on(0, hi[0]) {
                "right"
            } else {
                "boundary"
            };
            f.tag = Some(tag.to_string());
        }

        Ok(Mesh { vertices, elements, faces, bbox: [lo, hi] })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_interfaces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Distinct boundary tags in order of first appearance.
    pub fn boundary_tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = Vec::new();
        for f in self.faces.iter().filter(|f| f.is_boundary()) {
            let t = f.tag.as_deref().unwrap_or("boundary");
            if !tags.iter().any(|x| x == t) {
                tags.push(t.to_string());
            }
        }
        tags
    }

    pub fn regularity_report(&self) -> RegularityReport {
        let mut min_inradius_ratio = f64::INFINITY;
        let mut min_subdiameter_ratio = f64::INFINITY;
        let mut max_face_ratio: f64 = 0.0;
        let mut max_faces_per_element = 0;
        for elem in &self.elements {
            max_faces_per_element = max_faces_per_element.max(elem.faces.len());
            for t in &elem.sub_triangles {
                let edges = [dist(t[0], t[1]), dist(t[1], t[2]), dist(t[2], t[0])];
                let hs = edges.iter().copied().fold(0.0, f64::max);
                let inradius = 2.0 * triangle_area(t[0], t[1], t[2]) / edges.iter().sum::<f64>();
                min_inradius_ratio = min_inradius_ratio.min(inradius / hs);
                min_subdiameter_ratio = min_subdiameter_ratio.min(hs / elem.diameter);
            }
            for ef in &elem.faces {
                let hf = self.faces[ef.face].length;
                max_face_ratio = max_face_ratio.max(hf * hf / elem.area);
            }
        }
        RegularityReport { min_inradius_ratio, max_faces_per_element, max_face_ratio, min_subdiameter_ratio }
    }
}

fn build_element(e: usize, ids: Vec<usize>, vertices: &[Point]) -> Result<Element, MeshError> {
    let pts: Vec<Point> = ids.iter().map(|&v| vertices[v]).collect();
    let n = pts.len();
    // Shift to the first vertex to limit cancellation in the shoelace sums.
    let o = pts[0];
    let mut area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = sub(pts[i], o);
        let q = sub(pts[(i + 1) % n], o);
        let c = cross(p, q);
        area += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    area *= 0.5;
    if !(area > 0.0) {
        return Err(MeshError::Orientation { element: e });
    }
    let barycenter = [o[0] + cx / (6.0 * area), o[1] + cy / (6.0 * area)];
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diameter = diameter.max(dist(pts[i], pts[j]));
        }
    }
    let sub_triangles = if n == 3 {
        vec![[pts[0], pts[1], pts[2]]]
    } else {
        let tris: Vec<[Point; 3]> = (0..n).map(|i| [barycenter, pts[i], pts[(i + 1) % n]]).collect();
        // Collinear hanging nodes still give positive fan triangles; a
        // nonpositive one means the polygon is not star-shaped w.r.t. x_T.
        if tris.iter().any(|t| !(triangle_area(t[0], t[1], t[2]) > 1e-14 * area)) {
            return Err(MeshError::InvalidElement {
                element: e,
                msg: "not star-shaped with respect to its barycenter".into(),
            });
        }
        tris
    };
    Ok(Element { vertices: ids, diameter, area, barycenter, sub_triangles, faces: Vec::new() })
}
