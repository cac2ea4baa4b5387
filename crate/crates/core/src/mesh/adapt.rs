//! Crack-tip tracking and damage-driven refine/coarsen marking.

use super::{AdaptiveMesh, CellKey};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkParams {
    pub alpha_refine: f64,
    pub alpha_coarsen: f64,
    pub alpha_tip: f64,
    /// Cells ending further than this behind the tip are not refined.
    pub refine_margin: f64,
    /// Cells must end further than this behind the tip to be coarsened.
    pub coarsen_margin: f64,
    /// Number of vertex-neighbor rings added around damaged cells.
    pub rings: usize,
}

impl MarkParams {
    pub fn for_eps(eps: f64) -> Self {
        let band = 2.0 * std::f64::consts::PI * eps;
        Self { alpha_refine: 0.001, alpha_coarsen: 0.8, alpha_tip: 0.95, refine_margin: band, coarsen_margin: band, rings: 2 }
    }
}

impl Default for MarkParams {
    fn default() -> Self {
        Self::for_eps(0.5)
    }
}

/// Rightmost vertex with `alpha ≥ alpha_tip`; the vertical coordinate is
/// the mean over qualifying vertices at that abscissa. Falls back to `initial`.
pub fn find_crack_tip(mesh: &AdaptiveMesh, alpha: &[f64], alpha_tip: f64, initial: [f64; 2]) -> [f64; 2] {
    let mut best: Option<(i64, f64, usize)> = None;
    for v in 0..mesh.n_vertices() {
        if alpha[v] < alpha_tip {
            continue;
        }
        let (ix, _) = mesh.vertex_key(v);
        let y = mesh.vertex_position(v)[1];
        best = match best {
            None => Some((ix, y, 1)),
            Some((bx, _, _)) if ix > bx => Some((ix, y, 1)),
            Some((bx, sy, n)) if ix == bx => Some((bx, sy + y, n + 1)),
            other => other,
        };
    }
    match best {
        Some((ix, sy, n)) => [mesh.lattice_point(ix, 0)[0], sy / n as f64],
        None => initial,
    }
}

fn cell_alpha_range(mesh: &AdaptiveMesh, c: usize, alpha: &[f64]) -> (f64, f64) {
    mesh.cell_vertices(c).iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(alpha[v]), hi.max(alpha[v])))
}

/// Damaged cells near or ahead of the tip together with `rings` layers of
/// neighbors, restricted to cells below the maximum level.
pub fn mark_refine(mesh: &AdaptiveMesh, alpha: &[f64], tip: [f64; 2], params: &MarkParams) -> Vec<CellKey> {
    let mut seed: BTreeSet<CellKey> = BTreeSet::new();
    for (c, key) in mesh.cells().iter().enumerate() {
        let right = mesh.cell_origin(key)[0] + mesh.cell_size(key);
        if right < tip[0] - params.refine_margin {
            continue;
        }
        if cell_alpha_range(mesh, c, alpha).1 > params.alpha_refine {
            seed.insert(*key);
        }
    }
    let mut all = seed.clone();
    let mut front = seed;
    for _ in 0..params.rings {
        let mut next = BTreeSet::new();
        for k in &front {
            for n in mesh.neighbors(k) {
                if all.insert(n) {
                    next.insert(n);
                }
            }
        }
        front = next;
    }
    all.into_iter().filter(|k| k.level < mesh.max_level()).collect()
}

/// Refined cells well behind the tip whose vertices are all strongly damaged.
pub fn mark_coarsen(mesh: &AdaptiveMesh, alpha: &[f64], tip: [f64; 2], params: &MarkParams) -> Vec<CellKey> {
    mesh.cells()
        .iter()
        .enumerate()
        .filter(|(c, key)| {
            let right = mesh.cell_origin(key)[0] + mesh.cell_size(key);
            key.level > 0
                && right < tip[0] - params.coarsen_margin
                && cell_alpha_range(mesh, *c, alpha).0 >= params.alpha_coarsen
        })
        .map(|(_, k)| *k)
        .collect()
}

#[derive(Debug, Clone)]
pub struct Adaptation {
    pub mesh: AdaptiveMesh,
    pub fields: Vec<Vec<f64>>,
    pub changed: bool,
}

/// Coarsens then refines a copy of `mesh` and transfers every `(values, ncomp)` field.
pub fn execute_adaptation(
    mesh: &AdaptiveMesh,
    refine: &[CellKey],
    coarsen: &[CellKey],
    fields: &[(&[f64], usize)],
) -> Result<Adaptation> {
    if let Some(k) = refine.iter().find(|k| k.level >= mesh.max_level()) {
        return Err(Error::Internal(format!("refinement requested beyond the level cap for {k:?}")));
    }
    if refine.is_empty() && coarsen.is_empty() {
        return Ok(Adaptation {
            mesh: mesh.clone(),
            fields: fields.iter().map(|(v, _)| v.to_vec()).collect(),
            changed: false,
        });
    }
    let mut new = mesh.clone();
    let merged = new.coarsen(coarsen, refine);
    let split = new.refine(refine);
    let changed = merged + split > 0;
    if !changed {
        return Ok(Adaptation { mesh: mesh.clone(), fields: fields.iter().map(|(v, _)| v.to_vec()).collect(), changed });
    }
    // Vertices that became hanging keep injected values; project them back
    // into the conforming space.
    let fields = fields
        .iter()
        .map(|(v, n)| {
            let mut f = new.transfer_from(mesh, v, *n);
            new.apply_constraints(&mut f, *n);
            f
        })
        .collect();
    Ok(Adaptation { mesh: new, fields, changed })
}
