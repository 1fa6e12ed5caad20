//! TOML scenario configuration.
//!
//! ```toml
//! [mesh]
//! kind = "triangular"          # triangular | cartesian | nonmatching_refined
//! resolutions = [8, 16, 32]    # or: files = ["a.mesh", "b.mesh"]
//!
//! [discretization]
//! degree = 2
//!
//! [material]
//! law = "linear"               # linear | hencky_mises | damage | second_order
//! lambda = 1.1e6
//! mu = 8.2e5
//!
//! [load]
//! value = ["0", "0"]           # or: case = "hm_sine"
//!
//! [bc.bottom]
//! kind = "dirichlet"
//! value = ["0", "0"]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::HhoError;
use crate::hho::HhoOptions;
use crate::materials::{HenckyVariant, MaterialLaw};
use crate::mesh::{generate_mesh, read_mesh, Mesh, MeshKind};
use crate::solver::{BcKind, LinearSolver, NewtonOptions, WarmStart};

use super::cases::ManufacturedCase;
use super::expr::VectorExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKindName {
    Triangular,
    Cartesian,
    NonmatchingRefined,
}

impl From<MeshKindName> for MeshKind {
    fn from(k: MeshKindName) -> MeshKind {
        match k {
            MeshKindName::Triangular => MeshKind::Triangular,
            MeshKindName::Cartesian => MeshKind::Cartesian,
            MeshKindName::NonmatchingRefined => MeshKind::NonmatchingRefined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MeshConfig {
    pub kind: Option<MeshKindName>,
    #[serde(default)]
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct DiscretizationConfig {
    pub degree: usize,
    pub quad_degree: Option<usize>,
    pub orthonormal: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawName {
    Linear,
    HenckyMises,
    Damage,
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct MaterialConfig {
    pub law: LawName,
    pub lambda: f64,
    pub mu: f64,
    pub variant: Option<HenckyVariant>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct LoadConfig {
    pub case: Option<ManufacturedCase>,
    pub value: Option<[String; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKindName {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BcConfig {
    pub kind: BcKindName,
    pub value: [String; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolverName {
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SolverConfig {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub warm_start: Option<WarmStart>,
    pub condensed: Option<bool>,
    pub linear: Option<LinearSolverName>,
    pub cg_tol: Option<f64>,
    pub cg_max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
pub struct OutputConfig {
    pub table: Option<PathBuf>,
    pub vtk: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
pub struct ChecksConfig {
    /// Random strains for the constitutive finite-difference check.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Reverse the normals in the traction computation (debugging aid; the
    /// action-reaction check is expected to fail).
    #[serde(default)]
    pub flip_normals: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub mesh: MeshConfig,
    pub discretization: DiscretizationConfig,
    pub material: MaterialConfig,
    pub load: LoadConfig,
    #[serde(default)]
    pub bc: BTreeMap<String, BcConfig>,
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
}

/// Volumetric load source after validation.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadSource {
    Case(ManufacturedCase),
    Expr(VectorExpr),
}

/// Parse a configuration. Unknown keys are errors in strict mode and are
/// returned as warnings otherwise.
pub fn parse_config(text: &str, strict: bool) -> Result<(ScenarioConfig, Vec<String>), HhoError> {
    let de = toml::Deserializer::parse(text).map_err(|e| HhoError::Config(e.to_string()))?;
    let mut unknown = Vec::new();
    let cfg: ScenarioConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| HhoError::Config(e.to_string()))?;
    if strict && !unknown.is_empty() {
        return Err(HhoError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let warnings = unknown.into_iter().map(|k| format!("ignoring unknown key `{k}`")).collect();
    cfg.validate()?;
    Ok((cfg, warnings))
}

pub fn load_config(path: &Path, strict: bool) -> Result<(ScenarioConfig, Vec<String>), HhoError> {
    let text = std::fs::read_to_string(path).map_err(|e| HhoError::io(path, e))?;
    parse_config(&text, strict)
}

impl ScenarioConfig {
    /// Checks that do not need the mesh.
    pub fn validate(&self) -> Result<(), HhoError> {
        if self.discretization.degree == 0 {
            return Err(HhoError::Config("degree must be at least 1".into()));
        }
        if let Some(q) = self.discretization.quad_degree {
            if q > crate::poly::MAX_QUADRATURE_DEGREE {
                return Err(HhoError::QuadratureDegree(q));
            }
        }
        let m = &self.mesh;
        match (m.kind.is_some() || !m.resolutions.is_empty(), !m.files.is_empty()) {
            (true, true) => return Err(HhoError::Config("mesh: give either kind/resolutions or files".into())),
            (false, false) => return Err(HhoError::Config("mesh: no mesh given".into())),
            (true, false) => {
                if m.kind.is_none() || m.resolutions.is_empty() {
                    return Err(HhoError::Config("mesh: kind and resolutions go together".into()));
                }
                if m.resolutions.contains(&0) {
                    return Err(HhoError::Config("mesh: resolutions must be at least 1".into()));
                }
            }
            (false, true) => {}
        }
        self.law()?;
        self.load_source()?;
        for (tag, bc) in &self.bc {
            VectorExpr::parse(&bc.value[0], &bc.value[1]).map_err(|e| HhoError::Config(format!("bc.{tag}: {e}")))?;
        }
        if matches!(self.load_source()?, LoadSource::Expr(_)) && self.bc.is_empty() {
            return Err(HhoError::Config("boundary conditions are required with an expression load".into()));
        }
        self.newton_options()?;
        Ok(())
    }

    pub fn law(&self) -> Result<MaterialLaw, HhoError> {
        let m = &self.material;
        let law = match m.law {
            LawName::Linear => MaterialLaw::linear(m.lambda, m.mu)?,
            LawName::HenckyMises => {
                let v = m
                    .variant
                    .ok_or_else(|| HhoError::Config("material.variant is required for hencky_mises".into()))?;
                MaterialLaw::hencky_mises(v, m.lambda, m.mu)?
            }
            LawName::Damage => MaterialLaw::damage(m.lambda, m.mu)?,
            LawName::SecondOrder => {
                let need = |v: Option<f64>, n: &str| {
                    v.ok_or_else(|| HhoError::Config(format!("material.{n} is required for second_order")))
                };
                MaterialLaw::second_order(m.lambda, m.mu, need(m.a, "a")?, need(m.b, "b")?, need(m.c, "c")?)?
            }
        };
        match m.gamma {
            Some(g) => law.with_gamma(g),
            None => Ok(law),
        }
    }

    pub fn load_source(&self) -> Result<LoadSource, HhoError> {
        match (&self.load.case, &self.load.value) {
            (Some(c), None) => Ok(LoadSource::Case(*c)),
            (None, Some(v)) => Ok(LoadSource::Expr(
                VectorExpr::parse(&v[0], &v[1]).map_err(|e| HhoError::Config(format!("load: {e}")))?,
            )),
            _ => Err(HhoError::Config("load: exactly one of `case` and `value` is required".into())),
        }
    }

    pub fn hho_options(&self, quad_override: Option<usize>) -> HhoOptions {
        HhoOptions {
            degree: self.discretization.degree,
            quad_degree: quad_override.or(self.discretization.quad_degree),
            orthonormal: self.discretization.orthonormal,
        }
    }

    pub fn newton_options(&self) -> Result<NewtonOptions, HhoError> {
        let mut o = NewtonOptions::default();
        let Some(s) = self.solver else { return Ok(o) };
        if let Some(t) = s.tol {
            if !(t > 0.0) {
                return Err(HhoError::Config("solver.tol must be positive".into()));
            }
            o.tol = t;
        }
        if let Some(m) = s.max_iter {
            o.max_iter = m;
        }
        if let Some(w) = s.warm_start {
            o.warm_start = w;
        }
        if let Some(c) = s.condensed {
            o.condensed = c;
        }
        o.solver = match s.linear.unwrap_or(LinearSolverName::Direct) {
            LinearSolverName::Direct => LinearSolver::Direct,
            LinearSolverName::Cg => {
                LinearSolver::Cg { tol: s.cg_tol.unwrap_or(1e-12), max_iter: s.cg_max_iter.unwrap_or(10_000) }
            }
        };
        Ok(o)
    }

    /// The meshes of the refinement sequence, in order.
    pub fn meshes(&self) -> Result<Vec<Mesh>, HhoError> {
        if let Some(kind) = self.mesh.kind {
            self.mesh.resolutions.iter().map(|&n| Ok(generate_mesh(kind.into(), n)?)).collect()
        } else {
            self.mesh.files.iter().map(read_mesh).collect()
        }
    }

    pub fn num_meshes(&self) -> usize {
        self.mesh.resolutions.len() + self.mesh.files.len()
    }

    /// Boundary data of the configuration as (tag, kind, expression).
    pub fn boundary_data(&self) -> Result<Vec<(String, BcKind, VectorExpr)>, HhoError> {
        self.bc
            .iter()
            .map(|(tag, b)| {
                let kind = match b.kind {
                    BcKindName::Dirichlet => BcKind::Dirichlet,
                    BcKindName::Neumann => BcKind::Neumann,
                };
                Ok((tag.clone(), kind, VectorExpr::parse(&b.value[0], &b.value[1])?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[mesh]
kind = "triangular"
resolutions = [2, 4]

[discretization]
degree = 1

[material]
law = "hencky_mises"
variant = "exp"
lambda = 1.0
mu = 2.0

[load]
case = "hm_sine"
"#;

    #[test]
    fn parses_base_config() {
        let (cfg, warnings) = parse_config(BASE, true).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(cfg.num_meshes(), 2);
        assert_eq!(cfg.load_source().unwrap(), LoadSource::Case(ManufacturedCase::HmSine));
        assert_eq!(cfg.law().unwrap().gamma, 4.0);
        assert_eq!(cfg.newton_options().unwrap(), NewtonOptions::default());
    }

    #[test]
    fn unknown_keys_warn_or_fail() {
        let text = BASE.replace("degree = 1", "degree = 1\ndegre = 2");
        let (_, w) = parse_config(&text, false).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("discretization.degre"));
        assert!(parse_config(&text, true).is_err());
    }

    #[test]
    fn validation_errors() {
        let cases = [
            BASE.replace("degree = 1", "degree = 0"),
            BASE.replace("case = \"hm_sine\"", "case = \"hm_sine\"\nvalue = [\"0\", \"0\"]"),
            BASE.replace("case = \"hm_sine\"", ""),
            BASE.replace("variant = \"exp\"", ""),
            BASE.replace("resolutions = [2, 4]", "resolutions = [0]"),
            BASE.replace("resolutions = [2, 4]", "resolutions = [2]\nfiles = [\"a.mesh\"]"),
            BASE.replace("case = \"hm_sine\"", "case = \"nope\""),
            BASE.replace("case = \"hm_sine\"", "value = [\"sin(\", \"0\"]"),
            BASE.replace("law = \"hencky_mises\"", "law = \"second_order\""),
            BASE.replace("mu = 2.0", "mu = -2.0"),
            BASE.to_string() + "[solver]\ntol = -1.0\n",
            BASE.to_string() + "[output]\ntable = 3\n",
            "degree = ".to_string(),
        ];
        for text in cases {
            assert!(parse_config(&text, false).is_err(), "{text}");
        }
    }

    #[test]
    fn expression_load_needs_boundary_conditions() {
        let text = BASE.replace("case = \"hm_sine\"", "value = [\"0\", \"-1\"]");
        assert!(parse_config(&text, true).is_err());
        let text = text + "[bc.bottom]\nkind = \"dirichlet\"\nvalue = [\"0\", \"0\"]\n";
        let (cfg, _) = parse_config(&text, true).unwrap();
        let data = cfg.boundary_data().unwrap();
        assert_eq!(data[0].0, "bottom");
        assert_eq!(data[0].1, BcKind::Dirichlet);
    }

    #[test]
    fn solver_section() {
        let text =
            BASE.to_string() + "[solver]\ntol = 1e-10\nwarm_start = \"zero\"\ncondensed = false\nlinear = \"cg\"\n";
        let (cfg, _) = parse_config(&text, true).unwrap();
        let o = cfg.newton_options().unwrap();
        assert_eq!(o.tol, 1e-10);
        assert_eq!(o.warm_start, WarmStart::Zero);
        assert!(!o.condensed);
        assert!(matches!(o.solver, LinearSolver::Cg { .. }));
    }
}
