use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("element {element}: {msg}")]
    InvalidElement { element: usize, msg: String },
    #[error("vertices {a} and {b} coincide within tolerance")]
    DuplicateVertex { a: usize, b: usize },
    #[error("element {element} is not counter-clockwise")]
    Orientation { element: usize },
    #[error("inconsistent topology: {0}")]
    Topology(String),
    #[error("unsupported mesh kind `{0}`")]
    UnsupportedKind(String),
    #[error("resolution must be at least 1")]
    BadResolution,
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular {what} matrix (element {element:?})")]
    Singular { what: &'static str, element: Option<usize> },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("iterative solver did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

#[derive(Debug, Error)]
pub enum HhoError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("quadrature degree {0} exceeds the supported maximum")]
    QuadratureDegree(usize),
    #[error("polynomial degree k = {0} is not supported (k >= 1 required)")]
    Degree(usize),
    #[error("material: {0}")]
    Material(String),
    #[error("boundary conditions: {0}")]
    Boundary(String),
    #[error("convergence table: {0}")]
    Table(String),
    #[error("config: {0}")]
    Config(String),
    #[error("expression: {0}")]
    Expr(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("newton solver failed to converge after {iterations} iterations")]
    NewtonFailure { iterations: usize },
}

impl HhoError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HhoError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = HhoError> = std::result::Result<T, E>;
