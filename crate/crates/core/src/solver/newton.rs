use serde::{Deserialize, Serialize};

use crate::error::HhoError;
use crate::hho::DofVector;

use super::assembly::Problem;
use super::sparse::LinearSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    /// Start from the Dirichlet lift.
    Zero,
    /// Start from the solution of the problem linearized at zero strain.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Residual reduction relative to the residual of the Dirichlet lift.
    pub tol: f64,
    pub max_iter: usize,
    pub warm_start: WarmStart,
    pub condensed: bool,
    pub solver: LinearSolver,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-8,
            max_iter: 30,
            warm_start: WarmStart::Linear,
            condensed: true,
            solver: LinearSolver::Direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonReport {
    /// Newton corrections performed (the warm-start solve is not counted).
    pub iterations: usize,
    /// Relative residual norms, starting with the initial guess.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub warm_start: WarmStart,
    /// Residual norm of the Dirichlet lift used as reference.
    pub reference_residual: f64,
}

fn step(problem: &Problem, u: &DofVector, opts: &NewtonOptions) -> Result<DofVector, HhoError> {
    if opts.condensed {
        problem.condensed_step(u, opts.solver)
    } else {
        problem.full_step(u, opts.solver)
    }
}

/// One solve of the problem with the law linearized at zero strain.
pub fn solve_linear(problem: &Problem, opts: &NewtonOptions) -> Result<DofVector, HhoError> {
    let lin = problem.with_law(problem.law.linearized_at_zero());
    let u0 = lin.lift.clone();
    let delta = step(&lin, &u0, opts)?;
    Ok(u0 + delta)
}

/// Plain Newton iteration without damping.
pub fn newton_solve(problem: &Problem, opts: &NewtonOptions) -> Result<(DofVector, NewtonReport), HhoError> {
    newton_solve_from(problem, opts, None)
}

/// Newton iteration from a given initial guess (Dirichlet values are
/// overwritten by the lift), or from the warm start if `None`.
pub fn newton_solve_from(
    problem: &Problem,
    opts: &NewtonOptions,
    initial: Option<&DofVector>,
) -> Result<(DofVector, NewtonReport), HhoError> {
    let reference = problem.residual_norm(&problem.lift);
    let mut u = match (initial, opts.warm_start) {
        (Some(u0), _) => {
            let mut u = u0.clone();
            for (i, &d) in problem.dirichlet.iter().enumerate() {
                if d {
                    u[i] = problem.lift[i];
                }
            }
            u
        }
        (None, WarmStart::Zero) => problem.lift.clone(),
        (None, WarmStart::Linear) => solve_linear(problem, opts)?,
    };
    let mut report = NewtonReport {
        iterations: 0,
        residuals: Vec::new(),
        converged: false,
        warm_start: opts.warm_start,
        reference_residual: reference,
    };
    let scale = if reference > 0.0 { reference } else { 1.0 };
    loop {
        let res = problem.residual_norm(&u);
        report.residuals.push(res / scale);
        log::debug!("newton iteration {}: relative residual {:e}", report.iterations, res / scale);
        if !res.is_finite() {
            break;
        }
        if res <= opts.tol * scale {
            report.converged = true;
            break;
        }
        if report.iterations >= opts.max_iter {
            break;
        }
        let delta = step(problem, &u, opts)?;
        u += delta;
        report.iterations += 1;
    }
    if !report.converged {
        log::warn!(
            "newton did not converge after {} iterations (relative residual {:e})",
            report.iterations,
            report.residuals.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok((u, report))
}
