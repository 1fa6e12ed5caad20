//! Scenario configuration, built-in manufactured solutions and the drivers
//! behind the command-line interface.

mod cases;
mod config;
pub mod expr;
mod identities;
mod run;

pub use cases::{Grad, Hess, ManufacturedCase};
pub use config::{
    load_config, parse_config, BcConfig, ChecksConfig, DiscretizationConfig, LoadConfig, LoadSource, MaterialConfig,
    MeshConfig, OutputConfig, ScenarioConfig, SolverConfig,
};
pub use expr::{Expr, VectorExpr};
pub use identities::{operator_identities, sample_points, OperatorIdentities, SeededPolynomial};
pub use run::{
    boundary_conditions, run_checks, run_convergence, run_scenario, solve_manufactured, CheckReport, CheckResult,
    ConvergenceOutcome, LevelResult, RunOptions, RunSummary,
};
