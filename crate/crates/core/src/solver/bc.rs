use std::fmt;
use std::sync::Arc;

use crate::error::HhoError;
use crate::mesh::{Mesh, Point};

pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

pub fn constant_field(v: [f64; 2]) -> VectorField {
    Arc::new(move |_| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Prescribed displacement `g`.
    Dirichlet,
    /// Prescribed traction `sigma n = t`.
    Neumann,
}

#[derive(Clone)]
pub struct BoundaryCondition {
    pub kind: BcKind,
    pub value: VectorField,
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryCondition").field("kind", &self.kind).finish_non_exhaustive()
    }
}

/// Conditions keyed by boundary tag.
#[derive(Debug, Clone, Default)]
pub struct BoundaryConditions {
    entries: Vec<(String, BoundaryCondition)>,
}

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    /// Homogeneous Dirichlet conditions on every boundary tag of `mesh`.
    pub fn clamped(mesh: &Mesh) -> Self {
        let mut bc = Self::new();
        for tag in mesh.boundary_tags() {
            bc.set(&tag, BcKind::Dirichlet, constant_field([0.0; 2]));
        }
        bc
    }

    pub fn set(&mut self, tag: &str, kind: BcKind, value: VectorField) -> &mut Self {
        self.entries.retain(|(t, _)| t != tag);
        self.entries.push((tag.to_string(), BoundaryCondition { kind, value }));
        self
    }

    pub fn get(&self, tag: &str) -> Option<&BoundaryCondition> {
        self.entries.iter().find(|(t, _)| t == tag).map(|(_, c)| c)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    /// Condition of every face (`None` for interfaces). Fails if a boundary
    /// face has no condition or a condition names an unknown tag.
    pub fn resolve<'a>(&'a self, mesh: &Mesh) -> Result<Vec<Option<&'a BoundaryCondition>>, HhoError> {
        let known = mesh.boundary_tags();
        for tag in self.tags() {
            if !known.iter().any(|k| k == tag) {
                return Err(HhoError::Boundary(format!(
                    "tag `{tag}` does not exist in the mesh (known: {})",
                    known.join(", ")
                )));
            }
        }
        mesh.faces
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if !f.is_boundary() {
                    return Ok(None);
                }
                let tag = f.tag.as_deref().unwrap_or("boundary");
                self.get(tag)
                    .map(Some)
                    .ok_or_else(|| HhoError::Boundary(format!("boundary face {i} (tag `{tag}`) has no condition")))
            })
            .collect()
    }
}
