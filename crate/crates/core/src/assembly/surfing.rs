//! Mode-I surfing displacement field translated with the loading velocity.

use crate::model::{shear_modulus_and_kappa, MaterialParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfingParams {
    pub k_i: f64,
    pub velocity: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl SurfingParams {
    pub fn new(k_i: f64, velocity: f64, material: &MaterialParams) -> Self {
        let (mu, kappa) = shear_modulus_and_kappa(material.e_matrix, material.nu);
        Self { k_i, velocity, mu, kappa }
    }
}

impl Default for SurfingParams {
    fn default() -> Self {
        Self::new(1.1, 50.0, &MaterialParams::default())
    }
}

/// K-field displacement about the moving center `(v·t, tip_y)`; the branch
/// cut lies along the crack line behind the center with `θ ∈ (−π, π]`.
pub fn surfing_displacement(p: [f64; 2], t: f64, tip_y: f64, params: &SurfingParams) -> [f64; 2] {
    let dx = p[0] - params.velocity * t;
    let dy = p[1] - tip_y;
    let r = (dx * dx + dy * dy).sqrt();
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let mut theta = dy.atan2(dx);
    if theta <= -PI {
        theta = PI;
    }
    let amp = params.k_i / (2.0 * params.mu) * (r / (2.0 * PI)).sqrt() * (params.kappa - theta.cos());
    [amp * (0.5 * theta).cos(), amp * (0.5 * theta).sin()]
}
