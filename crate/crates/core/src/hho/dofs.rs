use std::ops::Range;

use crate::mesh::Mesh;
use crate::poly::{dim_cell, dim_face};

/// Layout of the global unknowns: all cell blocks first, then all face
/// blocks, each block component-major.
#[derive(Debug, Clone)]
pub struct DofSpace {
    pub degree: usize,
    pub cell_dim: usize,
    pub face_dim: usize,
    pub num_elements: usize,
    pub num_faces: usize,
    pub boundary: Vec<bool>,
}

impl DofSpace {
    pub fn new(mesh: &Mesh, degree: usize) -> Self {
        DofSpace {
            degree,
            cell_dim: 2 * dim_cell(degree),
            face_dim: 2 * dim_face(degree),
            num_elements: mesh.num_elements(),
            num_faces: mesh.num_faces(),
            boundary: mesh.faces.iter().map(|f| f.is_boundary()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.num_cell_dofs() + self.num_faces * self.face_dim
    }

    pub fn num_cell_dofs(&self) -> usize {
        self.num_elements * self.cell_dim
    }

    pub fn cell_offset(&self, t: usize) -> usize {
        t * self.cell_dim
    }

    pub fn face_offset(&self, f: usize) -> usize {
        self.num_cell_dofs() + f * self.face_dim
    }

    pub fn cell_range(&self, t: usize) -> Range<usize> {
        let o = self.cell_offset(t);
        o..o + self.cell_dim
    }

    pub fn face_range(&self, f: usize) -> Range<usize> {
        let o = self.face_offset(f);
        o..o + self.face_dim
    }

    /// Global indices of the local unknowns of element `t`: the cell block
    /// followed by the face blocks in the element's face order.
    pub fn local_dofs(&self, mesh: &Mesh, t: usize) -> Vec<usize> {
        let e = &mesh.elements[t];
        let mut out = Vec::with_capacity(self.cell_dim + e.faces.len() * self.face_dim);
        out.extend(self.cell_range(t));
        for ef in &e.faces {
            out.extend(self.face_range(ef.face));
        }
        out
    }

    /// Mask of face unknowns lying on boundary faces.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.dim()];
        for (f, &b) in self.boundary.iter().enumerate() {
            if b {
                mask[self.face_range(f)].iter_mut().for_each(|m| *m = true);
            }
        }
        mask
    }
}
