//! ASCII polygon mesh format.
//!
//! ```text
//! polymesh2d 1
//! vertices N
//! x y            (N lines)
//! cells M
//! n v1 ... vn    (M lines, 0-based, counter-clockwise)
//! boundary_tags K        (optional)
//! a b name       (K lines, boundary face by endpoint ids)
//! ```
//! Blank lines and lines starting with `#` are ignored.

use std::io::Write;
use std::path::Path;

use super::{Mesh, Point};
use crate::error::{HhoError, MeshError};

/// Cap on speculative allocation driven by counts read from the file.
const PREALLOC_CAP: usize = 1 << 16;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((i + 1, t.split_whitespace().collect()));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), MeshError> {
        self.next().ok_or_else(|| MeshError::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn perr(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn section(lines: &mut Lines, name: &str) -> Result<usize, MeshError> {
    let (ln, tok) = lines.expect(name)?;
    if tok.len() != 2 || tok[0] != name {
        return Err(perr(ln, format!("expected `{name} <count>`")));
    }
    tok[1].parse().map_err(|_| perr(ln, format!("bad {name} count `{}`", tok[1])))
}

/// Parses a mesh from text and builds its topology.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (ln, header) = lines.expect("header")?;
    if header != ["polymesh2d", "1"] {
        return Err(perr(ln, "expected header `polymesh2d 1`"));
    }
    let nv = section(&mut lines, "vertices")?;
    let mut vertices: Vec<Point> = Vec::with_capacity(nv.min(PREALLOC_CAP));
    for _ in 0..nv {
        let (ln, tok) = lines.expect("vertex")?;
        if tok.len() != 2 {
            return Err(perr(ln, "vertex line needs two coordinates"));
        }
        let x: f64 = tok[0].parse().map_err(|_| perr(ln, format!("bad coordinate `{}`", tok[0])))?;
        let y: f64 = tok[1].parse().map_err(|_| perr(ln, format!("bad coordinate `{}`", tok[1])))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(perr(ln, "non-finite coordinate"));
        }
        vertices.push([x, y]);
    }
    let nc = section(&mut lines, "cells")?;
    let mut cells = Vec::with_capacity(nc.min(PREALLOC_CAP));
    for _ in 0..nc {
        let (ln, tok) = lines.expect("cell")?;
        let n: usize = tok
            .first()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| perr(ln, "cell line must start with its vertex count"))?;
        if tok.len() - 1 != n {
            return Err(perr(ln, format!("cell declares {n} vertices but lists {}", tok.len() - 1)));
        }
        let ids = tok[1..]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| perr(ln, format!("bad vertex id `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(ids);
    }
    let mut tags = Vec::new();
    if let Some((ln, tok)) = lines.next() {
        if tok.len() != 2 || tok[0] != "boundary_tags" {
            return Err(perr(ln, "expected `boundary_tags <count>` or end of file"));
        }
        let nt: usize = tok[1].parse().map_err(|_| perr(ln, "bad boundary_tags count"))?;
        for _ in 0..nt {
            let (ln, tok) = lines.expect("boundary tag")?;
            if tok.len() != 3 {
                return Err(perr(ln, "boundary tag line is `a b name`"));
            }
            let a = tok[0].parse().map_err(|_| perr(ln, "bad vertex id"))?;
            let b = tok[1].parse().map_err(|_| perr(ln, "bad vertex id"))?;
            tags.push((a, b, tok[2].to_string()));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing content"));
        }
    }
    Mesh::from_polygons(vertices, cells, &tags)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh, HhoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HhoError::io(path, e))?;
    Ok(parse_mesh(&text)?)
}

/// Writes the mesh, hanging nodes included in the cell lists. Coordinates
/// use the shortest representation that parses back to the same `f64`.
pub fn write_mesh(mesh: &Mesh, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "polymesh2d 1")?;
    writeln!(out, "vertices {}", mesh.vertices.len())?;
    for p in &mesh.vertices {
        writeln!(out, "{:?} {:?}", p[0], p[1])?;
    }
    writeln!(out, "cells {}", mesh.elements.len())?;
    for e in &mesh.elements {
        write!(out, "{}", e.vertices.len())?;
        for v in &e.vertices {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    let tagged: Vec<_> = mesh.faces.iter().filter(|f| f.is_boundary()).collect();
    writeln!(out, "boundary_tags {}", tagged.len())?;
    for f in tagged {
        writeln!(out, "{} {} {}", f.vertices[0], f.vertices[1], f.tag.as_deref().unwrap_or("boundary"))?;
    }
    Ok(())
}
