//! Constitutive layer: plane-strain isotropic elasticity, the cohesive
//! phase-field degradation and crack geometric functions (linear softening),
//! and the elastic interface spring law.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Normalization constant of the crack geometric function `w(α) = 2α − α²`.
pub const C_W: f64 = PI;

/// Small 2×2 tensor, row-major.
pub type Tensor2 = [[f64; 2]; 2];

/// Material parameters of the matrix, inclusions and interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    pub e_matrix: f64,
    pub e_inclusion: f64,
    pub nu: f64,
    /// Interface stiffness (traction per unit jump).
    pub k_interface: f64,
    /// Fracture toughness of the matrix.
    pub gc: f64,
    /// Characteristic (Irwin) length.
    pub l_ch: f64,
    /// Regularization length of the phase field.
    pub eps: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            e_matrix: 1.0,
            e_inclusion: 5.0,
            nu: 0.3,
            k_interface: 100.0,
            gc: 1.0,
            l_ch: 1.0,
            eps: 0.5,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("e_matrix", self.e_matrix),
            ("e_inclusion", self.e_inclusion),
            ("k_interface", self.k_interface),
            ("gc", self.gc),
            ("l_ch", self.l_ch),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("material parameter {name} must be positive, got {v}"));
            }
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return Err(format!("Poisson ratio must lie in (0, 0.5), got {}", self.nu));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Elasticity {
        Elasticity::new(self.e_matrix, self.nu)
    }

    pub fn inclusion(&self) -> Elasticity {
        Elasticity::new(self.e_inclusion, self.nu)
    }
}

/// Plane-strain isotropic elasticity expressed through Lamé constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Elasticity {
    pub lambda: f64,
    pub mu: f64,
}

impl Elasticity {
    pub fn new(e: f64, nu: f64) -> Self {
        Self {
            lambda: e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
            mu: e / (2.0 * (1.0 + nu)),
        }
    }

    pub fn stress(&self, strain: &Tensor2) -> Tensor2 {
        let tr = strain[0][0] + strain[1][1];
        [
            [self.lambda * tr + 2.0 * self.mu * strain[0][0], 2.0 * self.mu * strain[0][1]],
            [2.0 * self.mu * strain[1][0], self.lambda * tr + 2.0 * self.mu * strain[1][1]],
        ]
    }

    /// Ψ = ½ σ : ε.
    pub fn energy_density(&self, strain: &Tensor2) -> f64 {
        let tr = strain[0][0] + strain[1][1];
        let dd = strain[0][0] * strain[0][0]
            + strain[1][1] * strain[1][1]
            + strain[0][1] * strain[0][1]
            + strain[1][0] * strain[1][0];
        0.5 * self.lambda * tr * tr + self.mu * dd
    }
}

/// Stress for a plane-strain isotropic law with modulus `e` and Poisson ratio `nu`.
pub fn stress(strain: &Tensor2, e: f64, nu: f64) -> Tensor2 {
    Elasticity::new(e, nu).stress(strain)
}

pub fn elastic_energy_density(strain: &Tensor2, e: f64, nu: f64) -> f64 {
    Elasticity::new(e, nu).energy_density(strain)
}

/// Shear modulus and Kolosov constant κ = 3 − 4ν (plane strain).
pub fn shear_modulus_and_kappa(e: f64, nu: f64) -> (f64, f64) {
    (e / (2.0 * (1.0 + nu)), 3.0 - 4.0 * nu)
}

/// Degradation function of the cohesive phase-field model with linear
/// softening, returning `(g, g', g'')`.
pub fn degradation(alpha: f64, params: &MaterialParams) -> (f64, f64, f64) {
    let a1 = 4.0 * params.l_ch / (PI * params.eps);
    let p = (1.0 - alpha) * (1.0 - alpha);
    let dp = -2.0 * (1.0 - alpha);
    let ddp = 2.0;
    let q = a1 * alpha * (1.0 - 0.5 * alpha);
    let dq = a1 * (1.0 - alpha);
    let ddq = -a1;
    let den = (p + q).max(1e-14);
    let dden = dp + dq;
    let ddden = ddp + ddq;
    let g = p / den;
    let dg = (dp * den - p * dden) / (den * den);
    // g'' = (p'' d − p d'')/d² − 2 d' (p' d − p d')/d³
    let ddg = (ddp * den - p * ddden) / (den * den) - 2.0 * dden * (dp * den - p * dden) / (den * den * den);
    (g, dg, ddg)
}

/// Crack geometric function `w(α) = 2α − α²` and its derivative.
pub fn geometric(alpha: f64) -> (f64, f64) {
    (2.0 * alpha - alpha * alpha, 2.0 - 2.0 * alpha)
}

/// Second derivative of the crack geometric function (constant).
pub const GEOMETRIC_SECOND_DERIVATIVE: f64 = -2.0;

/// Interface spring energy ½ k |⟦u⟧|² and traction k ⟦u⟧.
pub fn interface_energy(jump: [f64; 2], k_interface: f64) -> (f64, [f64; 2]) {
    let e = 0.5 * k_interface * (jump[0] * jump[0] + jump[1] * jump[1]);
    (e, [k_interface * jump[0], k_interface * jump[1]])
}

/// Optimal one-dimensional damage profile at distance `x` from the crack
/// center; vanishes beyond the half bandwidth πε/2.
pub fn reference_damage_profile(x: f64, eps: f64) -> f64 {
    let x = x.abs();
    if x <= 0.5 * PI * eps {
        1.0 - (x / eps).sin()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn degradation_end_points() {
        let p = MaterialParams::default();
        assert_eq!(degradation(0.0, &p).0, 1.0);
        assert_eq!(degradation(1.0, &p).0, 0.0);
    }

    #[test]
    fn degradation_mid_value() {
        // (0.25) / (0.25 + 8/π · 0.375), evaluated independently.
        let p = MaterialParams { eps: 0.5, l_ch: 1.0, ..Default::default() };
        let expected = 0.25 / (0.25 + (8.0 / PI) * 0.375);
        assert!((expected - 0.207481).abs() < 1e-6);
        assert!((degradation(0.5, &p).0 - expected).abs() < 1e-14);
    }

    #[test]
    fn degradation_strictly_decreasing() {
        let p = MaterialParams::default();
        for i in 0..1000 {
            let a = i as f64 * 1e-3;
            assert!(degradation(a, &p).1 < 0.0, "g'({a}) not negative");
        }
    }

    #[test]
    fn geometric_values() {
        assert_eq!(geometric(0.0).0, 0.0);
        assert_eq!(geometric(1.0).0, 1.0);
        assert_eq!(geometric(0.5).0, 0.75);
        for i in 0..=1000 {
            assert!(geometric(i as f64 * 1e-3).1 >= 0.0);
        }
    }

    #[test]
    fn lame_volumetric_energy() {
        let e = 0.01;
        let strain = [[e, 0.0], [0.0, e]];
        let el = Elasticity::new(1.0, 0.3);
        assert!((el.lambda - 0.576923).abs() < 1e-6);
        assert!((el.mu - 0.384615).abs() < 1e-6);
        let psi = elastic_energy_density(&strain, 1.0, 0.3);
        assert!((psi - 1.92308e-4).abs() < 1e-9);
        assert_eq!(elastic_energy_density(&[[0.0; 2]; 2], 1.0, 0.3), 0.0);
        assert_eq!(stress(&[[0.0; 2]; 2], 1.0, 0.3), [[0.0; 2]; 2]);
    }

    #[test]
    fn interface_spring() {
        assert_eq!(interface_energy([0.0, 0.0], 100.0), (0.0, [0.0, 0.0]));
        let (e, t) = interface_energy([0.01, 0.0], 100.0);
        assert!((e - 0.005).abs() < 1e-15);
        assert!((t[0] - 1.0).abs() < 1e-14 && t[1] == 0.0);
    }

    #[test]
    fn damage_profile_values() {
        assert_eq!(reference_damage_profile(0.0, 0.5), 1.0);
        assert!(reference_damage_profile(0.25 * PI, 0.5).abs() < 1e-15);
        assert!((reference_damage_profile(PI / 8.0, 0.5) - 0.292893).abs() < 1e-6);
        assert_eq!(reference_damage_profile(2.0, 0.5), 0.0);
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(alpha in 0.01f64..0.99) {
            let p = MaterialParams::default();
            let h = 1e-5;
            let (_, dg, ddg) = degradation(alpha, &p);
            let fd1 = (degradation(alpha + h, &p).0 - degradation(alpha - h, &p).0) / (2.0 * h);
            let fd2 = (degradation(alpha + h, &p).1 - degradation(alpha - h, &p).1) / (2.0 * h);
            prop_assert!(close(dg, fd1, 1e-6));
            prop_assert!(close(ddg, fd2, 1e-6));
            let fdw = (geometric(alpha + h).0 - geometric(alpha - h).0) / (2.0 * h);
            prop_assert!(close(geometric(alpha).1, fdw, 1e-6));
        }

        #[test]
        fn stress_is_energy_gradient(e00 in -1.0f64..1.0, e11 in -1.0f64..1.0, e01 in -1.0f64..1.0) {
            let el = Elasticity::new(1.0, 0.3);
            let strain = [[e00, e01], [e01, e11]];
            let s = el.stress(&strain);
            let h = 1e-6;
            for (i, j) in [(0usize, 0usize), (1, 1)] {
                let mut a = strain;
                let mut b = strain;
                a[i][j] += h;
                b[i][j] -= h;
                let fd = (el.energy_density(&a) - el.energy_density(&b)) / (2.0 * h);
                prop_assert!(close(s[i][j], fd, 1e-6));
            }
            // shear: perturb both symmetric entries, derivative is 2σ01
            let mut a = strain;
            let mut b = strain;
            a[0][1] += h; a[1][0] += h;
            b[0][1] -= h; b[1][0] -= h;
            let fd = (el.energy_density(&a) - el.energy_density(&b)) / (2.0 * h);
            prop_assert!(close(2.0 * s[0][1], fd, 1e-6));
            let twice = [[2.0 * e00, 2.0 * e01], [2.0 * e01, 2.0 * e11]];
            prop_assert!(close(el.energy_density(&twice), 4.0 * el.energy_density(&strain), 1e-12));
            prop_assert!(el.energy_density(&strain) >= 0.0);
        }

        #[test]
        fn traction_is_energy_gradient_and_isotropic(j0 in -1.0f64..1.0, j1 in -1.0f64..1.0, rot in 0.0f64..6.3) {
            let k = 100.0;
            let (e, t) = interface_energy([j0, j1], k);
            let h = 1e-6;
            let fd0 = (interface_energy([j0 + h, j1], k).0 - interface_energy([j0 - h, j1], k).0) / (2.0 * h);
            let fd1 = (interface_energy([j0, j1 + h], k).0 - interface_energy([j0, j1 - h], k).0) / (2.0 * h);
            prop_assert!(close(t[0], fd0, 1e-6) && close(t[1], fd1, 1e-6));
            let (c, s) = (rot.cos(), rot.sin());
            let (er, _) = interface_energy([c * j0 - s * j1, s * j0 + c * j1], k);
            prop_assert!(close(er, e, 1e-12));
        }
    }
}
