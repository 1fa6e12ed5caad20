mod common;

use nalgebra::DVector;
use polyhho::hho::{Discretization, HhoOptions};
use polyhho::materials::{HenckyVariant, MaterialLaw};
use polyhho::mesh::{generate_mesh, MeshKind, Point};
use polyhho::postprocess::{boundary_residuals, equilibrium_report, export_fields, total_energy};
use polyhho::solver::{constant_field, newton_solve, BcKind, BoundaryConditions, NewtonOptions, Problem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn laws() -> Vec<MaterialLaw> {
    vec![
        MaterialLaw::linear(1.0, 2.0).unwrap(),
        MaterialLaw::hencky_mises(HenckyVariant::Carreau, 1.0, 2.0).unwrap(),
        MaterialLaw::damage(1.0, 2.0).unwrap(),
        MaterialLaw::second_order(1.0, 2.0, 1.1, -0.48, 0.132).unwrap(),
    ]
}

fn pulled_square() -> BoundaryConditions {
    let mut bc = BoundaryConditions::new();
    bc.set("bottom", BcKind::Dirichlet, constant_field([0.0, 0.0]));
    bc.set("left", BcKind::Neumann, constant_field([0.0, 0.0]));
    bc.set("right", BcKind::Neumann, constant_field([0.0, 0.0]));
    bc.set("top", BcKind::Neumann, constant_field([0.05, 0.2]));
    bc
}

#[test]
fn boundary_residual_kernel_and_definition() {
    let mut rng = StdRng::seed_from_u64(4);
    for (_, mesh) in common::mesh_families() {
        for k in 1..=3 {
            let d = Discretization::new(mesh.clone(), HhoOptions::new(k)).unwrap();
            let p = (k + 1) as i32;
            let w = d.reduce(|x| [x[0].powi(p) - x[1], x[0] * x[1].powi(p - 1) + 1.0]).unwrap();
            for t in 0..d.mesh.num_elements() {
                let lo = &d.locals[t];
                let r = boundary_residuals(&d, t, &d.local(t, &w), 2.0).unwrap();
                assert!(r.iter().all(|v| v.amax() < 1e-11));
                let zero = DVector::zeros(lo.num_local());
                assert!(boundary_residuals(&d, t, &zero, 2.0).unwrap().iter().all(|v| v.amax() == 0.0));
            }
            // Defining relation against random face test functions.
            let t = d.mesh.num_elements() / 2;
            let lo = &d.locals[t];
            let nc = lo.cell_dim();
            let nb = lo.num_local() - nc;
            let local = DVector::from_fn(lo.num_local(), |_, _| rng.random_range(-1.0..1.0));
            let r = boundary_residuals(&d, t, &local, 2.0).unwrap();
            let delta = lo.boundary_difference(&local);
            let fd = lo.face_dim();
            let kf = fd / 2;
            for _ in 0..20 {
                let alpha = DVector::from_fn(nb, |_, _| rng.random_range(-1.0..1.0));
                let s = 2.0 * alpha.dot(&(lo.stabilization.view((nc, nc), (nb, nb)) * &delta));
                let mut lhs = 0.0;
                for (i, m) in lo.face_mass.iter().enumerate() {
                    for c in 0..2 {
                        let a = alpha.rows(i * fd + c * kf, kf);
                        lhs -= a.dot(&(m * r[i].rows(c * kf, kf)));
                    }
                }
                assert!((lhs - s).abs() <= 1e-11 * (1.0 + s.abs()), "{lhs} vs {s}");
            }
        }
    }
}

#[test]
fn local_equilibrium_at_discrete_solutions() {
    let meshes = vec![
        generate_mesh(MeshKind::Triangular, 3).unwrap(),
        generate_mesh(MeshKind::NonmatchingRefined, 2).unwrap(),
        common::hexagonal_mesh(3, 8),
    ];
    let f = |x: Point| [0.3 * x[1], -0.2];
    for mesh in meshes {
        for k in [1, 2] {
            let d = Discretization::new(mesh.clone(), HhoOptions::new(k)).unwrap();
            for law in laws() {
                let p = Problem::new(&d, law, &pulled_square(), &f).unwrap();
                let opts = NewtonOptions { tol: 1e-13, ..Default::default() };
                let (u, rep) = newton_solve(&p, &opts).unwrap();
                assert!(rep.converged, "{}", law.name());
                let (_, eq) = equilibrium_report(&p, &u, false).unwrap();
                assert!(eq.virtual_work < 1e-9, "{} k={k}: {eq:?}", law.name());
                assert!(eq.action_reaction < 1e-9, "{} k={k}: {eq:?}", law.name());
                assert!(eq.neumann < 1e-9, "{} k={k}: {eq:?}", law.name());

                let (_, bad) = equilibrium_report(&p, &u, true).unwrap();
                assert!(bad.action_reaction > 1e-6, "{}: {bad:?}", law.name());
            }
        }
    }
}

#[test]
fn zero_state_has_zero_tractions() {
    let d = Discretization::new(generate_mesh(MeshKind::Cartesian, 3).unwrap(), HhoOptions::new(2)).unwrap();
    let zero = |_: Point| [0.0, 0.0];
    let p = Problem::new(&d, laws()[1], &BoundaryConditions::clamped(&d.mesh), &zero).unwrap();
    let (field, eq) = equilibrium_report(&p, &d.zeros(), false).unwrap();
    assert!(field.values.iter().flatten().all(|v| v.amax() == 0.0));
    assert_eq!(eq.virtual_work, 0.0);
}

#[test]
fn vtk_export_of_zero_and_loaded_states() {
    let d = Discretization::new(generate_mesh(MeshKind::NonmatchingRefined, 2).unwrap(), HhoOptions::new(1)).unwrap();
    let law = laws()[0];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.vtk");
    export_fields(&d, &law, &d.zeros(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let np: usize = d.mesh.elements.iter().map(|e| e.vertices.len()).sum();
    check_vtk(&text, np, d.mesh.num_elements());
    let section = text.split("VECTORS displacement double\n").nth(1).unwrap();
    assert!(section.lines().take(np).all(|l| l.split(' ').all(|v| v.parse::<f64>().unwrap() == 0.0)));

    let f = |_: Point| [0.0, 0.0];
    let p = Problem::new(&d, law, &pulled_square(), &f).unwrap();
    let (u, _) = newton_solve(&p, &NewtonOptions::default()).unwrap();
    let path = dir.path().join("pulled.vtk");
    export_fields(&d, &law, &u, &path).unwrap();
    check_vtk(&std::fs::read_to_string(&path).unwrap(), np, d.mesh.num_elements());
    assert!(total_energy(&d, &law, &u).unwrap() > 0.0);
}

/// Structural validation of a legacy VTK unstructured grid.
fn check_vtk(text: &str, np: usize, nc: usize) {
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    assert_eq!(lines[2], "ASCII");
    assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
    assert_eq!(lines[4], format!("POINTS {np} double"));
    let mut i = 5 + np;
    let header: Vec<&str> = lines[i].split(' ').collect();
    assert_eq!(header[0], "CELLS");
    assert_eq!(header[1].parse::<usize>().unwrap(), nc);
    let size: usize = header[2].parse().unwrap();
    let mut seen = 0;
    for l in &lines[i + 1..i + 1 + nc] {
        let ids: Vec<usize> = l.split(' ').map(|v| v.parse().unwrap()).collect();
        assert_eq!(ids[0] + 1, ids.len());
        assert!(ids[1..].iter().all(|&v| v < np));
        seen += ids.len();
    }
    assert_eq!(seen, size);
    i += 1 + nc;
    assert_eq!(lines[i], format!("CELL_TYPES {nc}"));
    assert!(lines[i + 1..i + 1 + nc].iter().all(|&l| l == "7"));
    i += 1 + nc;
    assert_eq!(lines[i], format!("POINT_DATA {np}"));
    let mut j = i + 1;
    let mut cell_data = false;
    while j < lines.len() {
        let parts: Vec<&str> = lines[j].split(' ').collect();
        let count = if cell_data { nc } else { np };
        match parts[0] {
            "VECTORS" => {
                for l in &lines[j + 1..j + 1 + count] {
                    assert_eq!(l.split(' ').filter(|v| v.parse::<f64>().unwrap().is_finite()).count(), 3);
                }
                j += 1 + count;
            }
            "SCALARS" => {
                assert_eq!(lines[j + 1], "LOOKUP_TABLE default");
                for l in &lines[j + 2..j + 2 + count] {
                    assert!(l.parse::<f64>().unwrap().is_finite());
                }
                j += 2 + count;
            }
            "CELL_DATA" => {
                assert_eq!(parts[1].parse::<usize>().unwrap(), nc);
                cell_data = true;
                j += 1;
            }
            other => panic!("unexpected section {other}"),
        }
    }
    assert!(cell_data);
}
