//! Level-set sampling on the mesh, cut-cell classification and selection of
//! enriched vertices.

use super::quadrature::{classify, tensor_gauss, CellQuadrature, Classification};
use crate::geometry::{nearest_inclusion, InclusionLayout};
use crate::mesh::{AdaptiveMesh, CellKey};

/// Relative minority area below which a vertex is not enriched.
pub const MIN_ENRICHED_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Discretization {
    generation: u64,
    /// Nodal level-set values (hanging vertices averaged from their masters).
    pub psi: Vec<f64>,
    pub node_sign: Vec<i8>,
    /// Nearest inclusion per vertex.
    pub owner: Vec<Option<usize>>,
    pub cells: Vec<CellQuadrature>,
    /// Enrichment index per vertex.
    pub enrichment: Vec<Option<usize>>,
    pub enriched_vertices: Vec<usize>,
    /// Cells whose interface reconstruction is ambiguous and should be refined.
    pub ambiguous: Vec<CellKey>,
}

impl Discretization {
    pub fn new(mesh: &AdaptiveMesh, layout: &InclusionLayout) -> Self {
        let nv = mesh.n_vertices();
        let snap = 1e-10 * mesh.h_min();
        let mut psi = vec![f64::INFINITY; nv];
        let mut owner = vec![None; nv];
        if !layout.is_empty() {
            for v in 0..nv {
                if mesh.is_hanging(v) {
                    continue;
                }
                if let Some((k, val)) = nearest_inclusion(layout, mesh.vertex_position(v)) {
                    psi[v] = val;
                    owner[v] = Some(k);
                }
            }
            for h in mesh.hanging() {
                let [p, q] = h.masters;
                psi[h.vertex] = 0.5 * (psi[p] + psi[q]);
                owner[h.vertex] = if psi[p] <= psi[q] { owner[p] } else { owner[q] };
            }
            for v in psi.iter_mut() {
                if v.abs() < snap {
                    *v = snap;
                }
            }
        }
        let node_sign: Vec<i8> = psi.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();

        let mut cells = Vec::with_capacity(mesh.n_cells());
        let mut ambiguous = Vec::new();
        for (c, key) in mesh.cells().iter().enumerate() {
            let vs = mesh.cell_vertices(c);
            let h = mesh.cell_size(key);
            let ps = vs.map(|v| psi[v]);
            let mut inside: Vec<usize> = vs.iter().filter(|&&v| psi[v] < 0.0).filter_map(|&v| owner[v]).collect();
            inside.sort_unstable();
            inside.dedup();
            let q = match classify(ps, h) {
                Classification::Regular(q) if inside.len() <= 1 => q,
                _ => {
                    if key.level < mesh.max_level() {
                        ambiguous.push(*key);
                    } else {
                        log::warn!("unresolvable interface configuration in cell {key:?}; treating it as uncut");
                    }
                    let s = if ps.iter().map(|v| v.signum()).sum::<f64>() >= 0.0 { 1 } else { -1 };
                    CellQuadrature {
                        bulk: tensor_gauss(h, s),
                        interface: Vec::new(),
                        cut: false,
                        side_fractions: if s > 0 { [1.0, 0.0] } else { [0.0, 1.0] },
                    }
                }
            };
            cells.push(q);
        }

        // Area on the far side of each vertex's sign within its cut support.
        let mut far = vec![0.0; nv];
        let mut support = vec![0.0; nv];
        let mut touched = vec![false; nv];
        for (c, q) in cells.iter().enumerate() {
            if !q.cut {
                continue;
            }
            for v in mesh.cell_vertices(c) {
                touched[v] = true;
                support[v] += 1.0;
                far[v] += if node_sign[v] > 0 { q.side_fractions[1] } else { q.side_fractions[0] };
            }
        }
        let mut enrichment = vec![None; nv];
        let mut enriched_vertices = Vec::new();
        for v in 0..nv {
            if touched[v] && far[v] >= MIN_ENRICHED_FRACTION * support[v] {
                enrichment[v] = Some(enriched_vertices.len());
                enriched_vertices.push(v);
            }
        }
        Self { generation: mesh.generation(), psi, node_sign, owner, cells, enrichment, enriched_vertices, ambiguous }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn n_enriched(&self) -> usize {
        self.enriched_vertices.len()
    }

    /// Sum of all bulk weights.
    pub fn total_area(&self) -> f64 {
        self.cells.iter().flat_map(|q| q.bulk.iter()).map(|p| p.weight).sum()
    }

    /// Sum of interface weights (reconstructed interface length).
    pub fn interface_length(&self) -> f64 {
        self.cells.iter().flat_map(|q| q.interface.iter()).map(|p| p.weight).sum()
    }
}

/// Refines ambiguous cut cells until the interface reconstruction is unique
/// everywhere or the level cap is reached.
pub fn resolve_interfaces(mesh: &mut AdaptiveMesh, layout: &InclusionLayout) -> Discretization {
    loop {
        let d = Discretization::new(mesh, layout);
        if d.ambiguous.is_empty() || mesh.refine(&d.ambiguous) == 0 {
            return d;
        }
    }
}
