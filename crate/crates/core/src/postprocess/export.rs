use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::HhoError;
use crate::hho::{Discretization, DofVector};
use crate::materials::{norm, to_components, MaterialLaw};
use crate::mesh::Point;

/// Fields sampled at one element vertex, without averaging across elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexSample {
    pub position: Point,
    pub displacement: [f64; 2],
    /// `(s11, s12, s22)`.
    pub stress: [f64; 3],
    pub stress_norm: f64,
}

impl VertexSample {
    /// Samples for every element, vertices in element order.
    pub fn collect(disc: &Discretization, law: &MaterialLaw, u: &DofVector) -> Vec<Vec<VertexSample>> {
        disc.mesh
            .elements
            .iter()
            .enumerate()
            .map(|(t, el)| {
                let lo = &disc.locals[t];
                let local = disc.local(t, u);
                let g = &lo.gradient * &local;
                el.vertices
                    .iter()
                    .map(|&v| {
                        let x = disc.mesh.vertices[v];
                        let s = law.stress(&lo.tensor_at(&g, x));
                        let (s11, s22, s12) = to_components(&s);
                        VertexSample {
                            position: x,
                            displacement: lo.cell_value(&local, x),
                            stress: [s11, s12, s22],
                            stress_norm: norm(&s),
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Legacy VTK (ASCII, unstructured grid of polygons). Vertices are duplicated
/// per element so the discontinuous fields are shown as they are.
pub fn write_vtk<W: Write>(disc: &Discretization, law: &MaterialLaw, u: &DofVector, mut w: W) -> std::io::Result<()> {
    let samples = VertexSample::collect(disc, law, u);
    let np: usize = samples.iter().map(Vec::len).sum();
    let nc = samples.len();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "polyhho displacement and stress")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {np} double")?;
    for s in samples.iter().flatten() {
        writeln!(w, "{:e} {:e} 0", s.position[0], s.position[1])?;
    }
    writeln!(w, "CELLS {nc} {}", np + nc)?;
    let mut next = 0;
    for el in &samples {
        write!(w, "{}", el.len())?;
        for _ in el {
            write!(w, " {next}")?;
            next += 1;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "7")?;
    }

    writeln!(w, "POINT_DATA {np}")?;
    writeln!(w, "VECTORS displacement double")?;
    for s in samples.iter().flatten() {
        writeln!(w, "{:e} {:e} 0", s.displacement[0], s.displacement[1])?;
    }
    writeln!(w, "VECTORS deformed double")?;
    for s in samples.iter().flatten() {
        writeln!(w, "{:e} {:e} 0", s.position[0] + s.displacement[0], s.position[1] + s.displacement[1])?;
    }
    let scalar = |w: &mut W, name: &str, f: &dyn Fn(&VertexSample) -> f64| -> std::io::Result<()> {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for s in samples.iter().flatten() {
            writeln!(w, "{:e}", f(s))?;
        }
        Ok(())
    };
    scalar(&mut w, "sigma11", &|s| s.stress[0])?;
    scalar(&mut w, "sigma12", &|s| s.stress[1])?;
    scalar(&mut w, "sigma22", &|s| s.stress[2])?;
    scalar(&mut w, "stress_norm", &|s| s.stress_norm)?;

    writeln!(w, "CELL_DATA {nc}")?;
    writeln!(w, "SCALARS element int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for t in 0..nc {
        writeln!(w, "{t}")?;
    }
    writeln!(w, "SCALARS stress_norm_barycenter double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for (t, el) in disc.mesh.elements.iter().enumerate() {
        let lo = &disc.locals[t];
        let g = disc.gradient(t, u);
        writeln!(w, "{:e}", norm(&law.stress(&lo.tensor_at(&g, el.barycenter))))?;
    }
    w.flush()
}

pub fn export_fields(disc: &Discretization, law: &MaterialLaw, u: &DofVector, path: &Path) -> Result<(), HhoError> {
    let file = File::create(path).map_err(|e| HhoError::io(path, e))?;
    write_vtk(disc, law, u, BufWriter::new(file)).map_err(|e| HhoError::io(path, e))
}
