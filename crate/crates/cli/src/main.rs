use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use polyhho::postprocess::ConvergenceRow;
use polyhho::scenario::{load_config, run_checks, run_convergence, run_scenario, RunOptions, ScenarioConfig};

/// Hybrid high-order solver for linear and nonlinear elasticity on polygonal
/// meshes.
#[derive(Parser, Debug)]
#[command(name = "polyhho", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Quadrature degree for stresses, loads and errors.
    #[arg(long, global = true)]
    quad_degree: Option<usize>,
    /// Reject unknown configuration keys.
    #[arg(long, global = true)]
    strict_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence study of a manufactured case over a mesh sequence.
    Converge { config: PathBuf },
    /// Single solve with summary, VTK export and equilibrium report.
    Run { config: PathBuf },
    /// Property checks of the discretization and solver.
    Check {
        config: PathBuf,
        /// Reverse face normals in the traction computation.
        #[arg(long)]
        debug_flip_normals: bool,
    },
}

fn load(path: &Path, strict: bool) -> anyhow::Result<ScenarioConfig> {
    let (cfg, warnings) = load_config(path, strict).with_context(|| format!("reading {}", path.display()))?;
    for w in warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring threads")?;
    }
    let strict = cli.common.strict_config;
    let mut opts = RunOptions { quad_degree: cli.common.quad_degree, flip_normals: false };
    match cli.command {
        Command::Converge { config } => {
            let cfg = load(&config, strict)?;
            let out = run_convergence(&cfg, opts)?;
            print!("{}", ConvergenceRow::to_text(&out.rows));
            if !out.all_converged {
                log::error!("newton failed; table holds {} levels", out.rows.len());
            }
            Ok(out.all_converged)
        }
        Command::Run { config } => {
            let cfg = load(&config, strict)?;
            let s = run_scenario(&cfg, opts)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(s.newton.converged)
        }
        Command::Check { config, debug_flip_normals } => {
            let cfg = load(&config, strict)?;
            opts.flip_normals = debug_flip_normals;
            let report = run_checks(&cfg, opts)?;
            for c in &report.checks {
                println!(
                    "{} {} {:e} (tolerance {:e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HHO_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
