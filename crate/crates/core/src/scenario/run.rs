use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::HhoError;
use crate::hho::Discretization;
use crate::materials::{FiniteDifferenceCheck, MaterialLaw};
use crate::mesh::{Mesh, Point};
use crate::postprocess::{
    convergence_table, energy_error, equilibrium_report, export_fields, l2_projection_error, norm_equivalence,
    stabilization_candidates, total_energy, ConvergenceRow, EquilibriumReport, NormEquivalence,
    StabilizationCandidates, VertexSample,
};
use crate::solver::{newton_solve, BcKind, BoundaryConditions, NewtonOptions, NewtonReport, Problem};

use super::cases::ManufacturedCase;
use super::config::{LoadSource, ScenarioConfig};
use super::identities::{operator_identities, OperatorIdentities};

/// Command-line overrides.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub quad_degree: Option<usize>,
    pub flip_normals: bool,
}

type Field = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

fn load_field(cfg: &ScenarioConfig, law: MaterialLaw) -> Result<Field, HhoError> {
    Ok(match cfg.load_source()? {
        LoadSource::Case(case) => Arc::new(move |x| case.load(&law, x)),
        LoadSource::Expr(e) => Arc::new(move |x| e.eval(x)),
    })
}

/// Boundary conditions of the configuration; with a manufactured case and no
/// `[bc]` tables, the exact solution is imposed on every boundary tag.
pub fn boundary_conditions(cfg: &ScenarioConfig, mesh: &Mesh) -> Result<BoundaryConditions, HhoError> {
    let mut bc = BoundaryConditions::new();
    if cfg.bc.is_empty() {
        if let LoadSource::Case(case) = cfg.load_source()? {
            for tag in mesh.boundary_tags() {
                bc.set(&tag, BcKind::Dirichlet, Arc::new(move |x| case.value(x)));
            }
        }
    } else {
        for (tag, kind, e) in cfg.boundary_data()? {
            bc.set(&tag, kind, Arc::new(move |x| e.eval(x)));
        }
    }
    bc.resolve(mesh)?;
    Ok(bc)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HhoError> {
    let file = File::create(path).map_err(|e| HhoError::io(path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value).map_err(|e| HhoError::io(path, e.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub num_elements: usize,
    pub h: f64,
    pub unknowns: usize,
    pub newton: NewtonReport,
    pub energy_error: f64,
    pub l2_error: f64,
    pub stabilization: StabilizationCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceOutcome {
    pub name: Option<String>,
    pub case: ManufacturedCase,
    pub law: MaterialLaw,
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
    pub levels: Vec<LevelResult>,
    pub all_converged: bool,
}

/// Solve the manufactured case on one mesh and measure the errors.
pub fn solve_manufactured(
    cfg: &ScenarioConfig,
    case: ManufacturedCase,
    mesh: Mesh,
    opts: RunOptions,
    newton: &NewtonOptions,
) -> Result<LevelResult, HhoError> {
    let law = cfg.law()?;
    let bc = boundary_conditions(cfg, &mesh)?;
    let disc = Discretization::new(mesh, cfg.hho_options(opts.quad_degree))?;
    let f = load_field(cfg, law)?;
    let problem = Problem::new(&disc, law, &bc, &*f)?;
    let (u, report) = newton_solve(&problem, newton)?;
    let exact = disc.reduce(|x| case.value(x))?;
    Ok(LevelResult {
        num_elements: disc.mesh.num_elements(),
        h: disc.mesh.h(),
        unknowns: problem.condensed_size(),
        energy_error: energy_error(&disc, |x| case.sym_grad(x), &u)?,
        l2_error: l2_projection_error(&disc, |x| case.value(x), &u)?,
        stabilization: stabilization_candidates(&disc, &exact, &u, law.gamma),
        newton: report,
    })
}

/// Solve on every mesh of the sequence and write the table. The table holds
/// the levels solved so far if Newton fails.
pub fn run_convergence(cfg: &ScenarioConfig, opts: RunOptions) -> Result<ConvergenceOutcome, HhoError> {
    let LoadSource::Case(case) = cfg.load_source()? else {
        return Err(HhoError::Config("convergence studies need a manufactured `load.case`".into()));
    };
    let newton = cfg.newton_options()?;
    let mut levels = Vec::new();
    let mut all_converged = true;
    for (i, mesh) in cfg.meshes()?.into_iter().enumerate() {
        log::info!("level {i}: {} elements", mesh.num_elements());
        let level = solve_manufactured(cfg, case, mesh, opts, &newton)?;
        log::info!(
            "level {i}: {} newton iterations, energy error {:e}, l2 error {:e}",
            level.newton.iterations,
            level.energy_error,
            level.l2_error
        );
        let ok = level.newton.converged;
        levels.push(level);
        if !ok {
            all_converged = false;
            break;
        }
    }
    let triples: Vec<_> = levels.iter().map(|l| (l.h, l.energy_error, l.l2_error)).collect();
    let rows = if triples.is_empty() { Vec::new() } else { convergence_table(&triples)? };
    let outcome = ConvergenceOutcome {
        name: cfg.name.clone(),
        case,
        law: cfg.law()?,
        degree: cfg.discretization.degree,
        rows,
        levels,
        all_converged,
    };
    if let Some(path) = &cfg.output.table {
        let file = File::create(path).map_err(|e| HhoError::io(path, e))?;
        ConvergenceRow::write_csv(&outcome.rows, BufWriter::new(file))?;
    }
    if let Some(path) = &cfg.output.summary {
        write_json(path, &outcome)?;
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub law: MaterialLaw,
    pub degree: usize,
    pub num_elements: usize,
    pub h: f64,
    pub unknowns: usize,
    pub newton: NewtonReport,
    /// Total stored energy; absent for laws without one.
    pub energy: Option<f64>,
    pub equilibrium: EquilibriumReport,
    pub max_stress_norm: f64,
    pub max_stress_at: Point,
    pub parameter_warning: Option<String>,
}

/// Solve once on the single configured mesh; write the summary and exports.
pub fn run_scenario(cfg: &ScenarioConfig, opts: RunOptions) -> Result<RunSummary, HhoError> {
    if cfg.num_meshes() != 1 {
        return Err(HhoError::Config(format!("`run` needs exactly one mesh, got {}", cfg.num_meshes())));
    }
    let mesh = cfg.meshes()?.remove(0);
    let law = cfg.law()?;
    let bc = boundary_conditions(cfg, &mesh)?;
    let disc = Discretization::new(mesh, cfg.hho_options(opts.quad_degree))?;
    let f = load_field(cfg, law)?;
    let problem = Problem::new(&disc, law, &bc, &*f)?;
    let (u, newton) = newton_solve(&problem, &cfg.newton_options()?)?;
    let (_, equilibrium) = equilibrium_report(&problem, &u, opts.flip_normals)?;
    let energy = if law.is_hyperelastic() { Some(total_energy(&disc, &law, &u)?) } else { None };
    let (mut max_stress_norm, mut max_stress_at) = (0.0, [f64::NAN; 2]);
    for s in VertexSample::collect(&disc, &law, &u).iter().flatten() {
        if s.stress_norm > max_stress_norm {
            max_stress_norm = s.stress_norm;
            max_stress_at = s.position;
        }
    }
    let summary = RunSummary {
        name: cfg.name.clone(),
        law,
        degree: disc.degree(),
        num_elements: disc.mesh.num_elements(),
        h: disc.mesh.h(),
        unknowns: problem.condensed_size(),
        newton,
        energy,
        equilibrium,
        max_stress_norm,
        max_stress_at,
        parameter_warning: law.parameter_warning(),
    };
    if let Some(path) = &cfg.output.vtk {
        export_fields(&disc, &law, &u, path)?;
    }
    if let Some(path) = &cfg.output.summary {
        write_json(path, &summary)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub degree: usize,
    pub num_elements: usize,
    pub checks: Vec<CheckResult>,
    pub identities: OperatorIdentities,
    pub norm_equivalence: NormEquivalence,
    pub equilibrium: EquilibriumReport,
    pub finite_differences: FiniteDifferenceCheck,
    pub passed: bool,
}

/// Property suite on the first configured mesh.
pub fn run_checks(cfg: &ScenarioConfig, opts: RunOptions) -> Result<CheckReport, HhoError> {
    let mesh = cfg.meshes()?.into_iter().next().ok_or_else(|| HhoError::Config("no mesh".into()))?;
    let law = cfg.law()?;
    let bc = boundary_conditions(cfg, &mesh)?;
    let disc = Discretization::new(mesh, cfg.hho_options(opts.quad_degree))?;
    let seed = cfg.checks.seed.unwrap_or(1);
    let identities = operator_identities(&disc, seed)?;
    let ne = norm_equivalence(&disc)?;

    let f = load_field(cfg, law)?;
    let problem = Problem::new(&disc, law, &bc, &*f)?;
    let newton = NewtonOptions { tol: cfg.newton_options()?.tol.min(1e-12), ..cfg.newton_options()? };
    let (uc, rc) = newton_solve(&problem, &NewtonOptions { condensed: true, ..newton })?;
    let (uf, rf) = newton_solve(&problem, &NewtonOptions { condensed: false, ..newton })?;
    let condensation = if rc.converged && rf.converged {
        (&uc - &uf).amax() / uf.amax().max(f64::MIN_POSITIVE)
    } else {
        f64::INFINITY
    };
    let (_, eq) = equilibrium_report(&problem, &uc, opts.flip_normals || cfg.checks.flip_normals)?;
    let fd = law.finite_difference_check(cfg.checks.samples.unwrap_or(100), 0.5, seed);

    let check = |name, value: f64, tolerance| CheckResult { name, passed: value <= tolerance, value, tolerance };
    let mut checks = vec![
        check("commuting", identities.commuting, 1e-11),
        check("delta_kernel", identities.delta_kernel, 1e-11),
        check("projector", identities.projector, 1e-11),
        check("reformulation", identities.reformulation, 1e-11),
    ];
    checks.push(CheckResult {
        name: "norm_equivalence",
        passed: ne.lower > 0.0 && ne.lower <= 1.0 + 1e-10 && ne.upper >= 1.0 - 1e-10 && ne.upper.is_finite(),
        value: ne.eta(),
        tolerance: f64::INFINITY,
    });
    checks.push(check("condensation_equivalence", condensation, 1e-10));
    checks.push(check("virtual_work", eq.virtual_work, 1e-9));
    checks.push(check("action_reaction", eq.action_reaction, 1e-9));
    checks.push(check("tangent_fd", fd.tangent.max(fd.energy_gradient.unwrap_or(0.0)), 1e-6));
    let passed = checks.iter().all(|c| c.passed);
    let report = CheckReport {
        degree: disc.degree(),
        num_elements: disc.mesh.num_elements(),
        checks,
        identities,
        norm_equivalence: ne,
        equilibrium: eq,
        finite_differences: fd,
        passed,
    };
    if let Some(path) = &cfg.output.summary {
        write_json(path, &report)?;
    }
    Ok(report)
}
