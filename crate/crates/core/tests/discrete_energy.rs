use fracopt::assembly::{resolve_interfaces, DofKind, System, VertexBc};
use fracopt::geometry::{Ellipse, InclusionLayout};
use fracopt::mesh::{AdaptiveMesh, CellKey};
use fracopt::MaterialParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn layout(ellipses: Vec<Ellipse>) -> InclusionLayout {
    InclusionLayout { ellipses, rve: (15.0, 15.0), crack_offset: 0.0 }
}

/// 6×6 root cells with a few random refinements and one cut inclusion.
fn random_system(seed: u64) -> System {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mesh = AdaptiveMesh::new_grid([0.0, 0.0], 0.25, 2, 6, 6);
    let marks: Vec<CellKey> = (0..4).map(|_| CellKey::new(0, rng.random_range(0..6), rng.random_range(0..6))).collect();
    mesh.refine(&marks);
    let c = [rng.random_range(2.6..3.4), rng.random_range(2.6..3.4)];
    let lay = layout(vec![Ellipse::new(c, [rng.random_range(1.3..1.9), rng.random_range(1.3..1.9)], rng.random_range(0.0..PI))]);
    resolve_interfaces(&mut mesh, &lay);
    let bc: Vec<VertexBc> = (0..mesh.n_vertices())
        .map(|v| {
            let left = mesh.vertex_position(v)[0] == 0.0;
            VertexBc { displacement: left.then_some([0.0, 0.0]), alpha: None, fix_enrichment: left }
        })
        .collect();
    System::new(mesh, &lay, &bc, MaterialParams::default(), 1e-6)
}

fn random_state(system: &System, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..system.n_free())
        .map(|k| match system.dofs.kind(k) {
            DofKind::Displacement => rng.random_range(-0.1..0.1),
            DofKind::Enrichment => rng.random_range(-0.05..0.05),
            DofKind::PhaseField => rng.random_range(0.05..0.95),
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    for seed in 0..20u64 {
        let system = random_system(seed);
        assert!(system.disc.n_enriched() > 0, "inclusion must cut the mesh");
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x = random_state(&system, &mut rng);
        let g = system.gradient(&x);
        let fd: Vec<f64> = (0..x.len())
            .map(|k| {
                let h = 1e-6;
                let mut a = x.clone();
                a[k] += h;
                let mut b = x.clone();
                b[k] -= h;
                (system.energy(&a) - system.energy(&b)) / (2.0 * h)
            })
            .collect();
        let err: Vec<f64> = fd.iter().zip(&g).map(|(a, b)| a - b).collect();
        assert!(max_abs(&err) < 1e-5 * max_abs(&g), "seed {seed}: gradient error {}", max_abs(&err) / max_abs(&g));

        let v: Vec<f64> = (0..x.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hv = system.pattern.sym_matvec(&system.hessian(&x, false), &v);
        let h = 1e-6;
        let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let (gp, gm) = (system.gradient(&xp), system.gradient(&xm));
        let err: Vec<f64> = (0..x.len()).map(|k| (gp[k] - gm[k]) / (2.0 * h) - hv[k]).collect();
        assert!(max_abs(&err) < 1e-5 * max_abs(&hv), "seed {seed}: Hessian error {}", max_abs(&err) / max_abs(&hv));
    }
}

#[test]
fn energy_terms_sum_to_the_total() {
    let system = random_system(3);
    let x = random_state(&system, &mut ChaCha8Rng::seed_from_u64(3));
    let t = system.energy_terms(&x);
    assert!(t.matrix_bulk > 0.0 && t.inclusion_bulk > 0.0 && t.fracture > 0.0 && t.interface > 0.0);
    assert!((t.total() - system.energy(&x)).abs() < 1e-12 * system.energy(&x));
}

#[test]
fn zero_state_has_zero_energy() {
    let system = random_system(5);
    assert_eq!(system.energy(&vec![0.0; system.n_free()]), 0.0);
}

#[test]
fn rigid_translation_has_zero_energy() {
    let mut mesh = AdaptiveMesh::new_grid([0.0, 0.0], 0.25, 2, 6, 6);
    mesh.refine(&[CellKey::new(0, 2, 2), CellKey::new(0, 3, 3)]);
    let lay = layout(vec![Ellipse::circle([3.05, 2.95], 1.6)]);
    resolve_interfaces(&mut mesh, &lay);
    let bc = vec![VertexBc::default(); mesh.n_vertices()];
    let system = System::new(mesh, &lay, &bc, MaterialParams::default(), 1e-6);
    let x: Vec<f64> = (0..system.n_free())
        .map(|k| {
            if system.dofs.kind(k) == DofKind::Displacement {
                // Free unknowns alternate x and y components per vertex.
                let full = system.dofs.free_to_full()[k];
                if full % 2 == 0 { 0.37 } else { -1.2 }
            } else {
                0.0
            }
        })
        .collect();
    assert!(system.energy(&x).abs() < 1e-20);
}

#[test]
fn cut_quadrature_reproduces_the_domain_area() {
    for seed in 0..10 {
        let system = random_system(seed);
        assert!((system.disc.total_area() - 36.0).abs() < 1e-10);
    }
}

#[test]
fn interface_length_approximates_the_circumference() {
    let r = 2.5;
    let mut mesh = AdaptiveMesh::new_grid([0.0, 0.0], r / 10.0, 0, 40, 40);
    let lay = layout(vec![Ellipse::circle([5.03, 4.98], r)]);
    let d = resolve_interfaces(&mut mesh, &lay);
    let exact = 2.0 * PI * r;
    assert!((d.interface_length() - exact).abs() < 0.01 * exact, "{} vs {exact}", d.interface_length());
    let inside: f64 = d.cells.iter().flat_map(|c| c.bulk.iter()).filter(|p| p.side < 0).map(|p| p.weight).sum();
    assert!((inside - PI * r * r).abs() < 0.01 * PI * r * r);
}
