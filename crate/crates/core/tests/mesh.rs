use fracopt::mesh::{execute_adaptation, find_crack_tip, mark_coarsen, mark_refine, AdaptiveMesh, CellKey, MarkParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn randomly_refined(seed: u64, rounds: usize) -> AdaptiveMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mesh = AdaptiveMesh::new_grid([-1.0, 2.0], 0.125, 3, 5, 4);
    for _ in 0..rounds {
        let cells = mesh.cells().to_vec();
        let marks: Vec<CellKey> = (0..3).map(|_| cells[rng.random_range(0..cells.len())]).collect();
        mesh.refine(&marks);
    }
    mesh
}

fn bilinear_field(p: [f64; 2]) -> f64 {
    0.3 - 1.7 * p[0] + 2.2 * p[1] + 0.9 * p[0] * p[1]
}

fn cell_area_sum(mesh: &AdaptiveMesh) -> f64 {
    mesh.cells().iter().map(|k| mesh.cell_size(k).powi(2)).sum()
}

/// Exhaustive 2:1 check through shared edge segments at the finest lattice.
fn balanced_by_scan(mesh: &AdaptiveMesh) -> bool {
    let (nx, ny) = mesh.lattice_extent();
    let mut owner = vec![0u8; (nx * ny) as usize];
    for k in mesh.cells() {
        let s = mesh.lattice_size(k);
        for dy in 0..s {
            for dx in 0..s {
                owner[((k.j * s + dy) * nx + k.i * s + dx) as usize] = k.level;
            }
        }
    }
    for y in 0..ny {
        for x in 0..nx {
            let l = owner[(y * nx + x) as usize] as i32;
            if x + 1 < nx && (owner[(y * nx + x + 1) as usize] as i32 - l).abs() > 1 {
                return false;
            }
            if y + 1 < ny && (owner[((y + 1) * nx + x) as usize] as i32 - l).abs() > 1 {
                return false;
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refinement_keeps_balance_and_tiling(seed in 0u64..10_000, rounds in 1usize..6) {
        let mesh = randomly_refined(seed, rounds);
        prop_assert!(balanced_by_scan(&mesh));
        prop_assert!(mesh.is_balanced());
        let (lo, hi) = mesh.bounds();
        prop_assert!((cell_area_sum(&mesh) - (hi[0] - lo[0]) * (hi[1] - lo[1])).abs() < 1e-10);
    }

    #[test]
    fn bilinear_fields_transfer_exactly(seed in 0u64..10_000) {
        let mesh = randomly_refined(seed, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 77);
        let cells = mesh.cells().to_vec();
        let marks: Vec<CellKey> = (0..4).map(|_| cells[rng.random_range(0..cells.len())]).filter(|k| k.level < 3).collect();
        let f: Vec<f64> = mesh.vertex_positions().iter().map(|p| bilinear_field(*p)).collect();
        let ones = vec![1.0; mesh.n_vertices()];
        let a = execute_adaptation(&mesh, &marks, &[], &[(&f, 1), (&ones, 1)]).unwrap();
        for (v, p) in a.mesh.vertex_positions().iter().enumerate() {
            if !a.mesh.is_hanging(v) {
                prop_assert!((a.fields[0][v] - bilinear_field(*p)).abs() < 1e-12);
            }
            prop_assert!((a.fields[1][v] - 1.0).abs() < 1e-15);
        }
        for h in a.mesh.hanging() {
            let avg = 0.5 * (a.fields[0][h.masters[0]] + a.fields[0][h.masters[1]]);
            prop_assert!((a.fields[0][h.vertex] - avg).abs() < 1e-14);
        }
        prop_assert!(balanced_by_scan(&a.mesh));
    }
}

#[test]
fn empty_marks_leave_fields_untouched() {
    let mesh = randomly_refined(1, 2);
    let f: Vec<f64> = (0..mesh.n_vertices()).map(|v| v as f64 * 0.1).collect();
    let a = execute_adaptation(&mesh, &[], &[], &[(&f, 1)]).unwrap();
    assert!(!a.changed);
    assert_eq!(a.fields[0], f);
}

#[test]
fn refine_then_coarsen_restores_the_field() {
    let mesh = AdaptiveMesh::new_grid([0.0, 0.0], 0.25, 2, 4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.random::<f64>()).collect();
    let key = CellKey::new(0, 1, 2);
    let a = execute_adaptation(&mesh, &[key], &[], &[(&f, 1)]).unwrap();
    assert_eq!(a.mesh.n_cells(), 16 + 3);
    let b = execute_adaptation(&a.mesh, &[], &key.children(), &[(&a.fields[0], 1)]).unwrap();
    assert_eq!(b.mesh.cells(), mesh.cells());
    for v in 0..mesh.n_vertices() {
        let w = b.mesh.vertex_index(mesh.vertex_key(v)).unwrap();
        assert!((b.fields[0][w] - f[v]).abs() < 1e-12);
    }
}

#[test]
fn tip_of_a_damaged_band() {
    let mesh = AdaptiveMesh::new_grid([0.0, -2.0], 0.5, 0, 40, 8);
    let alpha: Vec<f64> = mesh
        .vertex_positions()
        .iter()
        .map(|p| if p[1].abs() < 0.3 && p[0] <= 12.0 { 1.0 } else { 0.0 })
        .collect();
    let tip = find_crack_tip(&mesh, &alpha, 0.95, [0.0, 0.0]);
    assert!(tip[0] <= 12.0 && tip[0] >= 12.0 - 0.5 && tip[1] == 0.0);
    let none = vec![0.0; mesh.n_vertices()];
    assert_eq!(find_crack_tip(&mesh, &none, 0.95, [3.0, 0.5]), [3.0, 0.5]);
}

#[test]
fn rightmost_of_two_bands_is_the_tip() {
    let mesh = AdaptiveMesh::new_grid([0.0, -4.0], 0.5, 0, 30, 16);
    let alpha: Vec<f64> = mesh
        .vertex_positions()
        .iter()
        .map(|p| if (p[1] + 2.0).abs() < 0.1 && p[0] <= 5.0 || (p[1] - 2.0).abs() < 0.1 && (7.0..=9.0).contains(&p[0]) { 1.0 } else { 0.0 })
        .collect();
    assert_eq!(find_crack_tip(&mesh, &alpha, 0.95, [0.0, 0.0]), [9.0, 2.0]);
}

#[test]
fn refine_marks_follow_damage_with_two_rings() {
    let mesh = AdaptiveMesh::new_grid([0.0, 0.0], 0.25, 1, 10, 10);
    let params = MarkParams::default();
    assert!(mark_refine(&mesh, &vec![0.0; mesh.n_vertices()], [0.0, 0.0], &params).is_empty());
    // One damaged vertex at the shared corner of cells (4,4), (5,4), (4,5), (5,5).
    let v = mesh.vertex_index((10, 10)).unwrap();
    let mut alpha = vec![0.0; mesh.n_vertices()];
    alpha[v] = 0.01;
    let marks = mark_refine(&mesh, &alpha, [0.0, 0.0], &params);
    // Damaged 2×2 block plus two rings: 6×6 cells.
    assert_eq!(marks.len(), 36);
    assert!(marks.iter().all(|k| (2..8).contains(&k.i) && (2..8).contains(&k.j)));
    // Cells at the level cap are never marked.
    let mut fine = mesh.clone();
    fine.refine(&mesh.cells().to_vec());
    let alpha = vec![0.5; fine.n_vertices()];
    assert!(mark_refine(&fine, &alpha, [0.0, 0.0], &params).is_empty());
}

#[test]
fn coarsen_marks_only_fully_damaged_cells_behind_the_tip() {
    let mut mesh = AdaptiveMesh::new_grid([0.0, 0.0], 0.25, 1, 20, 4);
    mesh.refine(&mesh.cells().to_vec());
    let params = MarkParams::default();
    let tip = [9.0, 0.5];
    let alpha: Vec<f64> = mesh.vertex_positions().iter().map(|p| if p[1] <= 0.5 { 1.0 } else { 0.5 }).collect();
    let marks = mark_coarsen(&mesh, &alpha, tip, &params);
    assert!(!marks.is_empty());
    for k in &marks {
        let o = mesh.cell_origin(k);
        assert!(o[0] + 0.25 < tip[0] - params.coarsen_margin && o[1] + 0.25 <= 0.5);
    }
    let ahead = vec![1.0; mesh.n_vertices()];
    assert!(mark_coarsen(&mesh, &ahead, [0.0, 0.5], &params).is_empty());
}
