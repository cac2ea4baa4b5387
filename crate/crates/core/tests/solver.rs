use fracopt::assembly::{crack_length, surfing_bcs, DofKind, Notch, SurfingParams, System, VertexBc};
use fracopt::geometry::{Ellipse, InclusionLayout};
use fracopt::mesh::{AdaptiveMesh, CellKey};
use fracopt::model::reference_damage_profile;
use fracopt::postproc::{j_contour, j_integral};
use fracopt::solver::{presolve_displacement, solve_coupled, IpmOptions, SparseCholesky};
use fracopt::MaterialParams;

fn affine(p: [f64; 2]) -> [f64; 2] {
    [0.01 + 0.02 * p[0] - 0.013 * p[1], -0.004 + 0.007 * p[0] + 0.011 * p[1]]
}

fn hanging_mesh() -> AdaptiveMesh {
    let mut mesh = AdaptiveMesh::new_grid([0.0, 0.0], 0.25, 2, 6, 6);
    mesh.refine(&[CellKey::new(0, 2, 2), CellKey::new(0, 3, 2), CellKey::new(0, 2, 3)]);
    mesh.refine(&[CellKey::new(1, 5, 5)]);
    assert!(!mesh.hanging().is_empty());
    mesh
}

/// Boundary displacement from `bc_u`, phase field pinned to zero everywhere.
fn elastic_bcs(mesh: &AdaptiveMesh, bc_u: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<VertexBc> {
    (0..mesh.n_vertices())
        .map(|v| {
            let boundary = mesh.is_boundary_vertex(v);
            let p = mesh.vertex_position(v);
            VertexBc { displacement: boundary.then(|| bc_u(p)), alpha: Some(0.0), fix_enrichment: boundary }
        })
        .collect()
}

fn disp_residual(system: &System, x: &[f64]) -> f64 {
    let g = system.gradient(x);
    (0..x.len())
        .filter(|&k| system.dofs.kind(k) != DofKind::PhaseField)
        .fold(0.0, |m, k| m.max(g[k].abs()))
}

#[test]
fn presolve_reproduces_affine_fields_on_a_hanging_mesh() {
    let mesh = hanging_mesh();
    let bc = elastic_bcs(&mesh, affine);
    let system = System::new(mesh, &InclusionLayout::empty(), &bc, MaterialParams::default(), 1e-6);
    let chol = SparseCholesky::new(&system.pattern).unwrap();
    let x0 = vec![0.0; system.n_free()];
    let r0 = disp_residual(&system, &x0);
    let x = presolve_displacement(&system, &chol, &x0).unwrap();
    assert!(disp_residual(&system, &x) < 1e-10 * r0);
    let full = system.dofs.expand(&x);
    for v in 0..system.mesh.n_vertices() {
        let exact = affine(system.mesh.vertex_position(v));
        for k in 0..2 {
            assert!((full[system.dofs.disp_index(v, k)] - exact[k]).abs() < 1e-10);
        }
    }
    let again = presolve_displacement(&system, &chol, &x).unwrap();
    let change = again.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(change < 1e-12, "{change}");
}

#[test]
fn zero_data_gives_zero_displacement() {
    let mut mesh = hanging_mesh();
    let lay = InclusionLayout { ellipses: vec![Ellipse::circle([3.1, 2.9], 1.4)], rve: (15.0, 15.0), crack_offset: 0.0 };
    fracopt::assembly::resolve_interfaces(&mut mesh, &lay);
    let bc = elastic_bcs(&mesh, |_| [0.0, 0.0]);
    let system = System::new(mesh, &lay, &bc, MaterialParams::default(), 1e-6);
    assert!(system.disc.n_enriched() > 0);
    let chol = SparseCholesky::new(&system.pattern).unwrap();
    let x = presolve_displacement(&system, &chol, &vec![0.0; system.n_free()]).unwrap();
    assert!(x.iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn strip_recovers_the_optimal_damage_profile() {
    let eps = 0.5;
    let h = 0.4 * eps;
    let mesh = AdaptiveMesh::new_grid([0.0, 0.0], h, 0, 20, 1);
    let material = MaterialParams { eps, ..MaterialParams::default() };
    // Opening prescribed and held; only the phase field is free, pinned to 1 at the crack.
    let bc: Vec<VertexBc> = (0..mesh.n_vertices())
        .map(|v| {
            let at_crack = mesh.vertex_position(v)[0] == 0.0;
            VertexBc { displacement: Some([0.0, 0.0]), alpha: at_crack.then_some(1.0), fix_enrichment: true }
        })
        .collect();
    let system = System::new(mesh, &InclusionLayout::empty(), &bc, material, 1e-6);
    let chol = SparseCholesky::new(&system.pattern).unwrap();
    let n = system.n_free();
    let x0 = vec![0.5; n];
    let (lo, hi) = (vec![0.0; n], vec![1.0; n]);
    let res = solve_coupled(&system, &chol, &x0, &lo, &hi, &IpmOptions::default()).unwrap();
    let full = system.dofs.expand(&res.x);
    let mut err = 0.0f64;
    for v in 0..system.mesh.n_vertices() {
        let x = system.mesh.vertex_position(v)[0];
        err = err.max((full[system.dofs.alpha_index(v)] - reference_damage_profile(x, eps)).abs());
    }
    assert!(err < 0.05, "L∞ error {err}");
}

/// Relative L² error of u_x against the perfectly bonded bar with the
/// interface at `a`, sampled on a fine midpoint grid.
fn bar_error(k_interface: f64) -> f64 {
    let (e1, e2, delta, a) = (1.0, 5.0, 0.01, 1.03);
    let r = 1e4;
    let lay = InclusionLayout { ellipses: vec![Ellipse::circle([a + r, 0.5], r)], rve: (15.0, 15.0), crack_offset: 0.0 };
    let mut mesh = AdaptiveMesh::new_grid([0.0, 0.0], 0.1, 0, 20, 10);
    fracopt::assembly::resolve_interfaces(&mut mesh, &lay);
    let bc: Vec<VertexBc> = (0..mesh.n_vertices())
        .map(|v| {
            let p = mesh.vertex_position(v);
            let displacement = if p[0] == 0.0 {
                Some([0.0, 0.0])
            } else if p[0] == 2.0 {
                Some([delta, 0.0])
            } else {
                None
            };
            VertexBc { displacement, alpha: Some(0.0), fix_enrichment: false }
        })
        .collect();
    let material = MaterialParams { e_matrix: e1, e_inclusion: e2, nu: 0.0, k_interface, ..MaterialParams::default() };
    let system = System::new(mesh, &lay, &bc, material, 0.0);
    assert!(system.disc.n_enriched() > 0);
    let chol = SparseCholesky::new(&system.pattern).unwrap();
    let x = presolve_displacement(&system, &chol, &vec![0.0; system.n_free()]).unwrap();
    let full = system.dofs.expand(&x);
    let sigma = delta / (a / e1 + (2.0 - a) / e2);
    let exact = |x: f64| if x < a { sigma * x / e1 } else { sigma * a / e1 + sigma * (x - a) / e2 };
    let (mut num, mut den) = (0.0, 0.0);
    let (nx, ny) = (400, 50);
    for i in 0..nx {
        for j in 0..ny {
            let p = [(i as f64 + 0.5) * 2.0 / nx as f64, (j as f64 + 0.5) / ny as f64];
            let u = system.evaluate_at(&full, p).unwrap().u[0];
            num += (u - exact(p[0])).powi(2);
            den += exact(p[0]).powi(2);
        }
    }
    (num / den).sqrt()
}

#[test]
fn stiff_interface_approaches_the_bonded_solution() {
    let errs: Vec<f64> = [1e2, 1e4, 1e6].iter().map(|&k| bar_error(k)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 0.01, "{errs:?}");
}

#[test]
fn boundary_and_interior_j_agree_in_an_elastic_state() {
    let material = MaterialParams::default();
    let notch = Notch { length: 8.0, ..Notch::default() };
    let mesh = AdaptiveMesh::new_grid([0.0, -6.0], 0.2, 0, 100, 60);
    let surf = SurfingParams::new(1.1, 50.0, &material);
    let t = notch.length / surf.velocity;
    let bc: Vec<VertexBc> = surfing_bcs(&mesh, t, 0.0, &surf, Some(&notch))
        .into_iter()
        .map(|b| VertexBc { alpha: Some(b.alpha.unwrap_or(0.0)), ..b })
        .collect();
    let system = System::new(mesh, &InclusionLayout::empty(), &bc, material, 1e-6);
    let chol = SparseCholesky::new(&system.pattern).unwrap();
    let x = presolve_displacement(&system, &chol, &vec![0.0; system.n_free()]).unwrap();
    let full = system.dofs.expand(&x);
    let outer = j_integral(&system, &full);
    let inner = j_contour(&system, &full, [4.1, -3.1, 12.1, 3.1], 40);
    assert!(outer > 0.0);
    assert!((outer - inner).abs() < 0.02 * outer, "boundary {outer} vs interior {inner}");
}

#[test]
fn crack_length_of_a_reference_band() {
    let eps = 0.5;
    let mesh = AdaptiveMesh::new_grid([0.0, -3.0], 0.05, 0, 200, 120);
    assert_eq!(crack_length(&mesh, &vec![0.0; mesh.n_vertices()], eps), 0.0);
    let alpha: Vec<f64> = mesh.vertex_positions().iter().map(|p| reference_damage_profile(p[1], eps)).collect();
    let l = crack_length(&mesh, &alpha, eps);
    assert!((l - 10.0).abs() < 0.5, "{l}");
    let half: Vec<f64> = mesh
        .vertex_positions()
        .iter()
        .map(|p| if p[0] <= 4.0 { reference_damage_profile(p[1], eps) } else { 0.0 })
        .collect();
    assert!(crack_length(&mesh, &half, eps) < l);
}
