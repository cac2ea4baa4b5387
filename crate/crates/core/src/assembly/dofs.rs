//! Degree-of-freedom layout with Dirichlet data and hanging-node constraints
//! condensed into affine maps onto the free unknowns.
//!
//! Full vector ordering: `[a (2 per vertex), b (2 per enriched vertex), c (1 per vertex)]`.

use super::discretization::Discretization;
use crate::mesh::AdaptiveMesh;

#[derive(Debug, Clone, PartialEq)]
pub enum Rep {
    Free(usize),
    Fixed(f64),
    /// `Σ w·x_free + constant`.
    Combo { terms: Vec<(usize, f64)>, constant: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Displacement,
    Enrichment,
    PhaseField,
}

/// Essential data of one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VertexBc {
    pub displacement: Option<[f64; 2]>,
    pub alpha: Option<f64>,
    /// Constrain enriched unknowns of this vertex to zero.
    pub fix_enrichment: bool,
}

#[derive(Debug, Clone)]
pub struct DofMap {
    n_vertices: usize,
    n_enriched: usize,
    reps: Vec<Rep>,
    free_to_full: Vec<usize>,
    kinds: Vec<DofKind>,
    /// Vertex owning each free dof.
    free_vertex: Vec<usize>,
}

fn accumulate(acc: &mut Vec<(usize, f64)>, constant: &mut f64, coeff: f64, rep: &Rep) {
    if coeff == 0.0 {
        return;
    }
    match rep {
        Rep::Free(k) => acc.push((*k, coeff)),
        Rep::Fixed(v) => *constant += coeff * v,
        Rep::Combo { terms, constant: c } => {
            acc.extend(terms.iter().map(|(k, w)| (*k, coeff * w)));
            *constant += coeff * c;
        }
    }
}

fn finish(mut acc: Vec<(usize, f64)>, constant: f64) -> Rep {
    acc.sort_by_key(|t| t.0);
    let mut terms: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
    for (k, w) in acc {
        match terms.last_mut() {
            Some(last) if last.0 == k => last.1 += w,
            _ => terms.push((k, w)),
        }
    }
    terms.retain(|t| t.1 != 0.0);
    if terms.is_empty() {
        Rep::Fixed(constant)
    } else {
        Rep::Combo { terms, constant }
    }
}

impl DofMap {
    pub fn new(mesh: &AdaptiveMesh, disc: &Discretization, bc: &[VertexBc]) -> Self {
        let nv = mesh.n_vertices();
        let ne = disc.n_enriched();
        assert_eq!(bc.len(), nv);
        let n_full = 3 * nv + 2 * ne;
        let mut reps = vec![Rep::Fixed(0.0); n_full];
        let mut free_to_full = Vec::new();
        let mut kinds = Vec::new();
        let mut free_vertex = Vec::new();
        let a_idx = |v: usize, k: usize| 2 * v + k;
        let b_idx = |e: usize, k: usize| 2 * nv + 2 * e + k;
        let c_idx = |v: usize| 2 * nv + 2 * ne + v;
        let crossed = |v: usize| {
            mesh.hanging_masters(v).is_some_and(|[p, q]| disc.node_sign[p] != disc.node_sign[q])
        };

        let mut push_free = |full: usize, kind: DofKind, v: usize, reps: &mut Vec<Rep>| {
            reps[full] = Rep::Free(free_to_full.len());
            free_to_full.push(full);
            kinds.push(kind);
            free_vertex.push(v);
        };
        for v in 0..nv {
            let hanging = mesh.is_hanging(v);
            if !hanging {
                for k in 0..2 {
                    match bc[v].displacement {
                        Some(u) => reps[a_idx(v, k)] = Rep::Fixed(u[k]),
                        None => push_free(a_idx(v, k), DofKind::Displacement, v, &mut reps),
                    }
                }
            }
            if let Some(e) = disc.enrichment[v] {
                if !hanging || !crossed(v) {
                    for k in 0..2 {
                        if bc[v].fix_enrichment && !hanging {
                            reps[b_idx(e, k)] = Rep::Fixed(0.0);
                        } else {
                            push_free(b_idx(e, k), DofKind::Enrichment, v, &mut reps);
                        }
                    }
                }
            }
            if !hanging {
                match bc[v].alpha {
                    Some(a) => reps[c_idx(v)] = Rep::Fixed(a),
                    None => push_free(c_idx(v), DofKind::PhaseField, v, &mut reps),
                }
            }
        }

        for h in mesh.hanging() {
            let v = h.vertex;
            let [p, q] = h.masters;
            let is_crossed = disc.node_sign[p] != disc.node_sign[q];
            let sh = disc.node_sign[v] as f64;
            let bp = disc.enrichment[p];
            let bq = disc.enrichment[q];
            for k in 0..2 {
                let mut acc = Vec::new();
                let mut cst = 0.0;
                accumulate(&mut acc, &mut cst, 0.5, &reps[a_idx(p, k)]);
                accumulate(&mut acc, &mut cst, 0.5, &reps[a_idx(q, k)]);
                if is_crossed {
                    if let Some(e) = bp {
                        accumulate(&mut acc, &mut cst, 0.5 * (sh - disc.node_sign[p] as f64), &reps[b_idx(e, k)]);
                    }
                    if let Some(e) = bq {
                        accumulate(&mut acc, &mut cst, 0.5 * (sh - disc.node_sign[q] as f64), &reps[b_idx(e, k)]);
                    }
                }
                reps[a_idx(v, k)] = finish(acc, cst);
                if let (true, Some(eh)) = (is_crossed, disc.enrichment[v]) {
                    let mut acc = Vec::new();
                    let mut cst = 0.0;
                    if let Some(e) = bp {
                        accumulate(&mut acc, &mut cst, 0.5, &reps[b_idx(e, k)]);
                    }
                    if let Some(e) = bq {
                        accumulate(&mut acc, &mut cst, 0.5, &reps[b_idx(e, k)]);
                    }
                    reps[b_idx(eh, k)] = finish(acc, cst);
                }
            }
            let mut acc = Vec::new();
            let mut cst = 0.0;
            accumulate(&mut acc, &mut cst, 0.5, &reps[c_idx(p)]);
            accumulate(&mut acc, &mut cst, 0.5, &reps[c_idx(q)]);
            reps[c_idx(v)] = finish(acc, cst);
        }
        Self { n_vertices: nv, n_enriched: ne, reps, free_to_full, kinds, free_vertex }
    }

    pub fn n_free(&self) -> usize {
        self.free_to_full.len()
    }

    pub fn n_full(&self) -> usize {
        self.reps.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_enriched(&self) -> usize {
        self.n_enriched
    }

    pub fn disp_index(&self, v: usize, k: usize) -> usize {
        2 * v + k
    }

    pub fn enr_index(&self, e: usize, k: usize) -> usize {
        2 * self.n_vertices + 2 * e + k
    }

    pub fn alpha_index(&self, v: usize) -> usize {
        2 * self.n_vertices + 2 * self.n_enriched + v
    }

    pub fn rep(&self, full: usize) -> &Rep {
        &self.reps[full]
    }

    pub fn kind(&self, free: usize) -> DofKind {
        self.kinds[free]
    }

    pub fn kinds(&self) -> &[DofKind] {
        &self.kinds
    }

    pub fn free_vertex(&self, free: usize) -> usize {
        self.free_vertex[free]
    }

    pub fn free_to_full(&self) -> &[usize] {
        &self.free_to_full
    }

    /// Full vector from free unknowns.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.reps
            .iter()
            .map(|r| match r {
                Rep::Free(k) => x[*k],
                Rep::Fixed(v) => *v,
                Rep::Combo { terms, constant } => constant + terms.iter().map(|(k, w)| w * x[*k]).sum::<f64>(),
            })
            .collect()
    }

    /// Free unknowns read from a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_to_full.iter().map(|&f| full[f]).collect()
    }

    /// Structural equality: same free set and the same constraint couplings.
    pub fn same_structure(&self, other: &DofMap) -> bool {
        if self.free_to_full != other.free_to_full || self.reps.len() != other.reps.len() {
            return false;
        }
        self.reps.iter().zip(&other.reps).all(|(a, b)| match (a, b) {
            (Rep::Free(x), Rep::Free(y)) => x == y,
            (Rep::Fixed(_), Rep::Fixed(_)) => true,
            (Rep::Combo { terms: t1, .. }, Rep::Combo { terms: t2, .. }) => t1 == t2,
            _ => false,
        })
    }
}
