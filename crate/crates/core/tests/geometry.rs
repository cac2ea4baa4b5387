use fracopt::geometry::{
    build_layout, clearance, design_clearance, is_feasible, level_set, pair_clearance, reference_domain, DesignVector,
    Domain, Ellipse, InclusionLayout, CRACK_OFFSETS,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

fn design() -> impl Strategy<Value = DesignVector> {
    let (lo, hi) = DesignVector::bounds();
    let ranges: Vec<_> = (0..9).map(|k| lo[k]..=hi[k]).collect();
    ranges.prop_map(|v| DesignVector::from_slice(&v).unwrap())
}

fn ellipse() -> impl Strategy<Value = Ellipse> {
    (-4.0..4.0f64, -4.0..4.0f64, 0.5..3.0f64, 0.5..3.0f64, -FRAC_PI_2..FRAC_PI_2)
        .prop_map(|(x, y, a, b, t)| Ellipse::new([x, y], [a, b], t))
}

fn boundary(e: &Ellipse, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|k| e.point(2.0 * PI * k as f64 / n as f64)).collect()
}

/// Gap between two ellipses measured on 720 boundary samples each.
fn dense_gap(a: &Ellipse, b: &Ellipse) -> f64 {
    let (pa, pb) = (boundary(a, 720), boundary(b, 720));
    let mut best = f64::INFINITY;
    for p in &pa {
        for q in &pb {
            best = best.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
        }
    }
    best
}

fn overlapping(a: &Ellipse, b: &Ellipse) -> bool {
    boundary(a, 720).iter().any(|p| b.rho(*p) <= 1.0) || boundary(b, 720).iter().any(|p| a.rho(*p) <= 1.0)
}

fn swapped(x: &DesignVector) -> DesignVector {
    DesignVector {
        x1: 1.0 - x.x1,
        x2: 1.0 - x.x2,
        x3: x.x6,
        x4: x.x7,
        x5: x.x8,
        x6: x.x3,
        x7: x.x4,
        x8: x.x5,
        x9: x.x9,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_clearance_matches_dense_sampling(a in ellipse(), b in ellipse()) {
        prop_assume!(!overlapping(&a, &b));
        let gap = pair_clearance(&a, &b);
        let oracle = dense_gap(&a, &b);
        prop_assert!((gap - oracle).abs() < 1e-3, "{gap} vs {oracle}");
        prop_assert!((pair_clearance(&b, &a) - gap).abs() < 1e-9);
    }

    #[test]
    fn overlapping_pairs_have_negative_clearance(a in ellipse(), b in ellipse()) {
        prop_assume!(a.contains(b.center) || b.contains(a.center));
        prop_assert!(pair_clearance(&a, &b) < 0.0);
    }

    #[test]
    fn clearance_is_symmetric_under_set_swap(x in design()) {
        let (c, s) = (design_clearance(&x), design_clearance(&swapped(&x)));
        prop_assert!((c - s).abs() < 1e-8, "{c} vs {s}");
    }

    #[test]
    fn feasibility_does_not_depend_on_the_crack_offset(x in design()) {
        let dom = reference_domain(&x);
        let c0 = clearance(&build_layout(&x, 0.0, &dom));
        for w in CRACK_OFFSETS {
            let c = clearance(&build_layout(&x, w, &dom));
            prop_assert!((c - c0).abs() < 1e-8);
        }
        prop_assert_eq!(is_feasible(&x, 0.5), c0 >= 0.5);
    }

    #[test]
    fn level_set_is_periodic(x in design(), px in 0.0..15.0f64, py in -3.0..3.0f64) {
        let dom = Domain { lx: 60.0, ly: 40.0 };
        let lay = build_layout(&x, 0.25, &dom);
        let p = [px + 15.0, py];
        let v = level_set(&lay, p);
        prop_assert!((level_set(&lay, [p[0] + 15.0, p[1]]) - v).abs() < 1e-12);
        prop_assert!((level_set(&lay, [p[0], p[1] + x.x9]) - v).abs() < 1e-12);
    }
}

#[test]
fn level_set_sign_matches_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = DesignVector { x1: 0.3, x2: 0.4, x3: 4.0, x4: 2.6, x5: 0.7, x6: 3.1, x7: 2.5, x8: -1.1, x9: 12.0 };
    let lay = build_layout(&x, 0.5, &Domain { lx: 45.0, ly: 24.0 });
    for _ in 0..10_000 {
        let p = [rng.random_range(0.0..45.0), rng.random_range(-12.0..12.0)];
        let inside = lay.ellipses.iter().any(|e| e.rho(p) < 1.0);
        let v = level_set(&lay, p);
        assert_eq!(v < 0.0, inside, "at {p:?}: {v}");
    }
}

#[test]
fn circle_level_set_is_the_signed_distance() {
    let lay = InclusionLayout { ellipses: vec![Ellipse::circle([1.0, 2.0], 2.5)], rve: (15.0, 15.0), crack_offset: 0.0 };
    assert!((level_set(&lay, [1.0, 2.0]) + 2.5).abs() < 1e-14);
    assert!(level_set(&lay, [3.5, 2.0]).abs() < 1e-14);
    assert!((level_set(&lay, [5.0, 2.0]) - 1.5).abs() < 1e-14);
}

#[test]
fn worked_clearance_values() {
    let a = Ellipse::circle([0.0, 0.0], 2.5);
    assert!((pair_clearance(&a, &Ellipse::circle([10.0, 0.0], 2.5)) - 5.0).abs() < 1e-9);
    assert!((pair_clearance(&a, &a) + 5.0).abs() < 1e-3);
    // Staggered circles of radius 2.5 in a 15 × 6 cell: vertical neighbours are 1 apart.
    assert!((design_clearance(&DesignVector::default()) - 1.0).abs() < 1e-8);
    assert!((pair_clearance(&a, &Ellipse::circle([7.5, 3.0], 2.5)) - 3.0777).abs() < 1e-4);
    assert!(is_feasible(&DesignVector::default(), 0.5));
    assert!(!is_feasible(&DesignVector::default(), 1.5));
}
