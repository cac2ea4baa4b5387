//! Bilinear finite elements with shifted-sign enrichment on interface-cut
//! cells, surfing boundary data and assembly of the discrete energy.

pub mod discretization;
pub mod dofs;
pub mod quadrature;
pub mod surfing;
pub mod system;

pub use discretization::{resolve_interfaces, Discretization};
pub use dofs::{DofKind, DofMap, Rep, VertexBc};
pub use quadrature::{classify, BulkPoint, CellQuadrature, Classification, InterfacePoint};
pub use surfing::{surfing_displacement, SurfingParams};
pub use system::{EnergyTerms, FractureState, Pattern, PointValue, System};

use crate::mesh::{bilinear, AdaptiveMesh};
use serde::{Deserialize, Serialize};

/// Pre-damaged band along the initial crack entering from the left edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Notch {
    pub length: f64,
    pub y: f64,
    /// Number of vertex rows on either side of the crack line that are fully damaged.
    pub half_rows: usize,
}

impl Default for Notch {
    fn default() -> Self {
        Self { length: 5.0, y: 0.0, half_rows: 1 }
    }
}

impl Notch {
    pub fn contains(&self, p: [f64; 2], h_min: f64) -> bool {
        p[0] <= self.length + 1e-9 && (p[1] - self.y).abs() <= (self.half_rows as f64 + 0.01) * h_min
    }

    pub fn tip(&self) -> [f64; 2] {
        [self.length, self.y]
    }
}

/// Essential data of a surfing run: K-field displacements on the whole
/// boundary, zero enrichment there, phase field 1 in the notch and 0 on the
/// rest of the boundary.
pub fn surfing_bcs(mesh: &AdaptiveMesh, t: f64, tip_y: f64, params: &SurfingParams, notch: Option<&Notch>) -> Vec<VertexBc> {
    (0..mesh.n_vertices())
        .map(|v| {
            let p = mesh.vertex_position(v);
            let boundary = mesh.is_boundary_vertex(v);
            let in_notch = notch.is_some_and(|n| n.contains(p, mesh.h_min()));
            VertexBc {
                displacement: boundary.then(|| surfing_displacement(p, t, tip_y, params)),
                alpha: if in_notch {
                    Some(1.0)
                } else if boundary {
                    Some(0.0)
                } else {
                    None
                },
                fix_enrichment: boundary,
            }
        })
        .collect()
}

/// Integral of the regularized crack-surface density `(w(α)/ε + ε|∇α|²)/c_w`
/// with a 2×2 Gauss rule per cell.
pub fn crack_length(mesh: &AdaptiveMesh, alpha: &[f64], eps: f64) -> f64 {
    let g = quadrature::tensor_gauss(1.0, 1);
    let mut total = 0.0;
    for (c, key) in mesh.cells().iter().enumerate() {
        let h = mesh.cell_size(key);
        let vs = mesh.cell_vertices(c);
        let ca = vs.map(|v| alpha[v]);
        if ca.iter().all(|&a| a == 0.0) {
            continue;
        }
        for qp in &g {
            let n = bilinear(qp.xi);
            let dn = crate::mesh::bilinear_grad(qp.xi);
            let a: f64 = (0..4).map(|k| n[k] * ca[k]).sum();
            let gx: f64 = (0..4).map(|k| dn[k][0] * ca[k]).sum::<f64>() / h;
            let gy: f64 = (0..4).map(|k| dn[k][1] * ca[k]).sum::<f64>() / h;
            let (w, _) = crate::model::geometric(a);
            total += qp.weight * h * h * (w / eps + eps * (gx * gx + gy * gy));
        }
    }
    total / crate::model::C_W
}
