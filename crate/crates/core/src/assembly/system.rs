//! Discrete energy with its exact gradient and Hessian in the space of free
//! unknowns.

use super::discretization::Discretization;
use super::dofs::{DofKind, DofMap, Rep, VertexBc};
use crate::error::{Error, Result};
use crate::geometry::InclusionLayout;
use crate::mesh::{bilinear, bilinear_grad, AdaptiveMesh};
use crate::model::{degradation, geometric, Elasticity, MaterialParams, Tensor2, C_W, GEOMETRIC_SECOND_DERIVATIVE};

/// Lower-triangular compressed-column sparsity pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub diag: Vec<usize>,
}

impl Pattern {
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Position of entry `(row, col)` with `row ≥ col`.
    #[inline]
    pub fn position(&self, row: usize, col: usize) -> usize {
        let rows = &self.row_idx[self.col_ptr[col]..self.col_ptr[col + 1]];
        match rows.binary_search(&row) {
            Ok(k) => self.col_ptr[col] + k,
            Err(_) => panic!("entry ({row}, {col}) outside the sparsity pattern"),
        }
    }

    /// Symmetric matrix-vector product from lower-triangular values.
    pub fn sym_matvec(&self, values: &[f64], x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                y[r] += values[k] * x[c];
                if r != c {
                    y[c] += values[k] * x[r];
                }
            }
        }
        y
    }
}

/// The four terms of the discrete energy.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyTerms {
    pub matrix_bulk: f64,
    pub inclusion_bulk: f64,
    pub fracture: f64,
    pub interface: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.matrix_bulk + self.inclusion_bulk + self.fracture + self.interface
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Energy,
    Gradient,
    Hessian,
}

/// Nodal fields on the mesh vertices: displacement (2 per vertex),
/// enrichment (2 per vertex, zero where not enriched) and phase field.
#[derive(Debug, Clone, PartialEq)]
pub struct FractureState {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha: Vec<f64>,
    pub step: usize,
    pub generation: u64,
}

impl FractureState {
    pub fn zeros(mesh: &AdaptiveMesh) -> Self {
        let n = mesh.n_vertices();
        Self { u: vec![0.0; 2 * n], b: vec![0.0; 2 * n], alpha: vec![0.0; n], step: 0, generation: mesh.generation() }
    }
}

/// Quadrature data and constraints of one mesh plus the material law.
#[derive(Debug, Clone)]
pub struct System {
    pub mesh: AdaptiveMesh,
    pub disc: Discretization,
    pub dofs: DofMap,
    pub pattern: Pattern,
    pub material: MaterialParams,
    /// Residual stiffness added to the degradation in the matrix.
    pub residual_stiffness: f64,
    matrix_law: Elasticity,
    inclusion_law: Elasticity,
    local: Vec<LocalCell>,
}

/// Local unknown layout of one cell.
#[derive(Debug, Clone)]
struct LocalCell {
    /// Full indices: 8 displacement, 2 per enriched corner, 4 phase field.
    full: Vec<usize>,
    /// Corner index of each enriched pair.
    enr_corner: Vec<usize>,
}

impl LocalCell {
    fn n_enr(&self) -> usize {
        self.enr_corner.len()
    }
    fn alpha_offset(&self) -> usize {
        8 + 2 * self.n_enr()
    }
}

impl System {
    pub fn new(
        mesh: AdaptiveMesh,
        layout: &InclusionLayout,
        bc: &[VertexBc],
        material: MaterialParams,
        residual_stiffness: f64,
    ) -> Self {
        let disc = Discretization::new(&mesh, layout);
        Self::with_discretization(mesh, disc, bc, material, residual_stiffness)
    }

    pub fn with_discretization(
        mesh: AdaptiveMesh,
        disc: Discretization,
        bc: &[VertexBc],
        material: MaterialParams,
        residual_stiffness: f64,
    ) -> Self {
        let dofs = DofMap::new(&mesh, &disc, bc);
        let local = build_local(&mesh, &disc, &dofs);
        let pattern = build_pattern(&dofs, &local);
        Self {
            matrix_law: material.matrix(),
            inclusion_law: material.inclusion(),
            mesh,
            disc,
            dofs,
            pattern,
            material,
            residual_stiffness,
            local,
        }
    }

    /// Replaces the essential data; the sparsity pattern is rebuilt only if
    /// the constraint structure changed. Returns whether it did.
    pub fn update_bc(&mut self, bc: &[VertexBc]) -> bool {
        let dofs = DofMap::new(&self.mesh, &self.disc, bc);
        let same = dofs.same_structure(&self.dofs);
        self.dofs = dofs;
        if !same {
            self.local = build_local(&self.mesh, &self.disc, &self.dofs);
            self.pattern = build_pattern(&self.dofs, &self.local);
        }
        !same
    }

    pub fn n_free(&self) -> usize {
        self.dofs.n_free()
    }

    /// Full vector from nodal state fields.
    pub fn full_from_state(&self, state: &FractureState) -> Result<Vec<f64>> {
        if state.generation != self.mesh.generation() {
            return Err(Error::GenerationMismatch { state: state.generation, mesh: self.mesh.generation() });
        }
        let nv = self.mesh.n_vertices();
        let mut full = vec![0.0; self.dofs.n_full()];
        full[..2 * nv].copy_from_slice(&state.u);
        for (e, &v) in self.disc.enriched_vertices.iter().enumerate() {
            full[self.dofs.enr_index(e, 0)] = state.b[2 * v];
            full[self.dofs.enr_index(e, 1)] = state.b[2 * v + 1];
        }
        let c0 = self.dofs.alpha_index(0);
        full[c0..c0 + nv].copy_from_slice(&state.alpha);
        Ok(full)
    }

    /// Free unknowns of a state (constrained values are ignored).
    pub fn free_from_state(&self, state: &FractureState) -> Result<Vec<f64>> {
        Ok(self.dofs.restrict(&self.full_from_state(state)?))
    }

    /// Nodal state with all constraints applied.
    pub fn state_from_free(&self, x: &[f64], step: usize) -> FractureState {
        let full = self.dofs.expand(x);
        let nv = self.mesh.n_vertices();
        let mut b = vec![0.0; 2 * nv];
        for (e, &v) in self.disc.enriched_vertices.iter().enumerate() {
            b[2 * v] = full[self.dofs.enr_index(e, 0)];
            b[2 * v + 1] = full[self.dofs.enr_index(e, 1)];
        }
        let c0 = self.dofs.alpha_index(0);
        FractureState {
            u: full[..2 * nv].to_vec(),
            b,
            alpha: full[c0..c0 + nv].to_vec(),
            step,
            generation: self.mesh.generation(),
        }
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        self.energy_terms(x).total()
    }

    pub fn energy_terms(&self, x: &[f64]) -> EnergyTerms {
        let full = self.dofs.expand(x);
        let mut terms = EnergyTerms::default();
        self.run(&full, Mode::Energy, false, &mut terms, &mut [], &mut []);
        terms
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let full = self.dofs.expand(x);
        let mut terms = EnergyTerms::default();
        let mut g = vec![0.0; self.n_free()];
        self.run(&full, Mode::Gradient, false, &mut terms, &mut g, &mut []);
        g
    }

    pub fn energy_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let full = self.dofs.expand(x);
        let mut terms = EnergyTerms::default();
        let mut g = vec![0.0; self.n_free()];
        self.run(&full, Mode::Gradient, false, &mut terms, &mut g, &mut []);
        (terms.total(), g)
    }

    /// Lower-triangular Hessian values in [`System::pattern`] order. With
    /// `freeze_alpha`, phase-field rows and columns are replaced by the identity.
    pub fn hessian(&self, x: &[f64], freeze_alpha: bool) -> Vec<f64> {
        let full = self.dofs.expand(x);
        let mut terms = EnergyTerms::default();
        let mut h = vec![0.0; self.pattern.nnz()];
        self.run(&full, Mode::Hessian, freeze_alpha, &mut terms, &mut [], &mut h);
        if freeze_alpha {
            for (k, kind) in self.dofs.kinds().iter().enumerate() {
                if *kind == DofKind::PhaseField {
                    h[self.pattern.diag[k]] = 1.0;
                }
            }
        }
        h
    }

    fn run(&self, full: &[f64], mode: Mode, freeze_alpha: bool, terms: &mut EnergyTerms, grad: &mut [f64], hess: &mut [f64]) {
        let mut ke = Vec::new();
        let mut fe = Vec::new();
        let mut ue = Vec::new();
        for (c, lc) in self.local.iter().enumerate() {
            let n = lc.full.len();
            ue.clear();
            ue.extend(lc.full.iter().map(|&f| full[f]));
            fe.clear();
            fe.resize(n, 0.0);
            if mode == Mode::Hessian {
                ke.clear();
                ke.resize(n * n, 0.0);
            }
            self.cell_kernel(c, lc, &ue, mode, terms, &mut fe, &mut ke);
            match mode {
                Mode::Energy => {}
                Mode::Gradient => {
                    for (i, &f) in lc.full.iter().enumerate() {
                        scatter_vec(self.dofs.rep(f), fe[i], grad);
                    }
                }
                Mode::Hessian => {
                    let ao = lc.alpha_offset();
                    for i in 0..n {
                        if freeze_alpha && i >= ao {
                            continue;
                        }
                        let ri = self.dofs.rep(lc.full[i]);
                        for j in 0..n {
                            if freeze_alpha && j >= ao {
                                continue;
                            }
                            let v = ke[i * n + j];
                            if v == 0.0 {
                                continue;
                            }
                            scatter_mat(&self.pattern, ri, self.dofs.rep(lc.full[j]), v, hess);
                        }
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn cell_kernel(&self, c: usize, lc: &LocalCell, ue: &[f64], mode: Mode, terms: &mut EnergyTerms, fe: &mut [f64], ke: &mut [f64]) {
        let key = self.mesh.cells()[c];
        let h = self.mesh.cell_size(&key);
        let quad = &self.disc.cells[c];
        let verts = self.mesh.cell_vertices(c);
        let n = lc.full.len();
        let ao = lc.alpha_offset();
        let ne = lc.n_enr();
        let gc = self.material.gc / C_W;
        let eps = self.material.eps;
        // Displacement basis entries: (local index, component, gradient).
        let mut basis: Vec<(usize, usize, [f64; 2])> = Vec::with_capacity(8 + 2 * ne);
        for qp in &quad.bulk {
            let nv = bilinear(qp.xi);
            let dn = bilinear_grad(qp.xi).map(|g| [g[0] / h, g[1] / h]);
            basis.clear();
            for a in 0..4 {
                for k in 0..2 {
                    basis.push((2 * a + k, k, dn[a]));
                }
            }
            for (e, &a) in lc.enr_corner.iter().enumerate() {
                let xi = (qp.side - self.disc.node_sign[verts[a]]) as f64;
                if xi != 0.0 {
                    for k in 0..2 {
                        basis.push((8 + 2 * e + k, k, [xi * dn[a][0], xi * dn[a][1]]));
                    }
                }
            }
            let mut gu = [[0.0; 2]; 2];
            for &(i, k, g) in &basis {
                gu[k][0] += ue[i] * g[0];
                gu[k][1] += ue[i] * g[1];
            }
            let off = 0.5 * (gu[0][1] + gu[1][0]);
            let strain: Tensor2 = [[gu[0][0], off], [off, gu[1][1]]];
            let matrix = qp.side > 0;
            let law = if matrix { &self.matrix_law } else { &self.inclusion_law };
            let psi = law.energy_density(&strain);
            let sigma = law.stress(&strain);
            let mut alpha = 0.0;
            let mut galpha = [0.0; 2];
            for a in 0..4 {
                let ca = ue[ao + a];
                alpha += nv[a] * ca;
                galpha[0] += dn[a][0] * ca;
                galpha[1] += dn[a][1] * ca;
            }
            let (gd, dg, ddg) = if matrix {
                let (g, dg, ddg) = degradation(alpha, &self.material);
                (g + self.residual_stiffness, dg, ddg)
            } else {
                (1.0, 0.0, 0.0)
            };
            let w = qp.weight;
            let (wa, dwa) = geometric(alpha);
            let e_bulk = w * gd * psi;
            if matrix {
                terms.matrix_bulk += e_bulk;
            } else {
                terms.inclusion_bulk += e_bulk;
            }
            terms.fracture += w * gc * (wa / eps + eps * (galpha[0] * galpha[0] + galpha[1] * galpha[1]));
            if mode == Mode::Energy {
                continue;
            }
            // σ·g for each displacement basis entry.
            let sg: Vec<f64> = basis.iter().map(|&(_, k, g)| sigma[k][0] * g[0] + sigma[k][1] * g[1]).collect();
            for (b, &(i, _, _)) in basis.iter().enumerate() {
                fe[i] += w * gd * sg[b];
            }
            for a in 0..4 {
                let gdot = galpha[0] * dn[a][0] + galpha[1] * dn[a][1];
                fe[ao + a] += w * (dg * nv[a] * psi + gc * (dwa * nv[a] / eps + 2.0 * eps * gdot));
            }
            if mode != Mode::Hessian {
                continue;
            }
            let (lam, mu) = (law.lambda, law.mu);
            for (bi, &(i, ki, gi)) in basis.iter().enumerate() {
                for &(j, kj, gj) in &basis {
                    let dot = gi[0] * gj[0] + gi[1] * gj[1];
                    let mut d = lam * gi[ki] * gj[kj] + mu * gi[kj] * gj[ki];
                    if ki == kj {
                        d += mu * dot;
                    }
                    ke[i * n + j] += w * gd * d;
                }
                if matrix {
                    for a in 0..4 {
                        let v = w * dg * nv[a] * sg[bi];
                        ke[i * n + ao + a] += v;
                        ke[(ao + a) * n + i] += v;
                    }
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    let dd = dn[a][0] * dn[b][0] + dn[a][1] * dn[b][1];
                    ke[(ao + a) * n + ao + b] += w
                        * (ddg * nv[a] * nv[b] * psi
                            + gc * (GEOMETRIC_SECOND_DERIVATIVE * nv[a] * nv[b] / eps + 2.0 * eps * dd));
                }
            }
        }
        if quad.interface.is_empty() || ne == 0 {
            return;
        }
        let k_i = self.material.k_interface;
        for qp in &quad.interface {
            let nv = bilinear(qp.xi);
            let mut jump = [0.0; 2];
            for (e, &a) in lc.enr_corner.iter().enumerate() {
                jump[0] += 2.0 * nv[a] * ue[8 + 2 * e];
                jump[1] += 2.0 * nv[a] * ue[8 + 2 * e + 1];
            }
            let w = qp.weight;
            terms.interface += w * 0.5 * k_i * (jump[0] * jump[0] + jump[1] * jump[1]);
            if mode == Mode::Energy {
                continue;
            }
            for (e, &a) in lc.enr_corner.iter().enumerate() {
                for k in 0..2 {
                    fe[8 + 2 * e + k] += w * k_i * jump[k] * 2.0 * nv[a];
                }
            }
            if mode != Mode::Hessian {
                continue;
            }
            for (e1, &a1) in lc.enr_corner.iter().enumerate() {
                for (e2, &a2) in lc.enr_corner.iter().enumerate() {
                    let v = w * k_i * 4.0 * nv[a1] * nv[a2];
                    for k in 0..2 {
                        ke[(8 + 2 * e1 + k) * n + 8 + 2 * e2 + k] += v;
                    }
                }
            }
        }
    }

    /// Displacement gradient, phase field and material side at a point.
    pub fn evaluate_at(&self, full: &[f64], p: [f64; 2]) -> Option<PointValue> {
        let (c, xi) = self.mesh.locate(p)?;
        let key = self.mesh.cells()[c];
        let h = self.mesh.cell_size(&key);
        let verts = self.mesh.cell_vertices(c);
        let nv = bilinear(xi);
        let dn = bilinear_grad(xi).map(|g| [g[0] / h, g[1] / h]);
        let psi: f64 = (0..4).map(|a| nv[a] * self.disc.psi[verts[a]]).sum();
        let side: i8 = if !psi.is_finite() || psi >= 0.0 { 1 } else { -1 };
        let mut u = [0.0; 2];
        let mut gu = [[0.0; 2]; 2];
        let mut alpha = 0.0;
        for a in 0..4 {
            let v = verts[a];
            for k in 0..2 {
                let val = full[self.dofs.disp_index(v, k)];
                u[k] += nv[a] * val;
                gu[k][0] += dn[a][0] * val;
                gu[k][1] += dn[a][1] * val;
            }
            alpha += nv[a] * full[self.dofs.alpha_index(v)];
            if self.disc.cells[c].cut {
                if let Some(e) = self.disc.enrichment[v] {
                    let s = (side - self.disc.node_sign[v]) as f64;
                    for k in 0..2 {
                        let val = s * full[self.dofs.enr_index(e, k)];
                        u[k] += nv[a] * val;
                        gu[k][0] += dn[a][0] * val;
                        gu[k][1] += dn[a][1] * val;
                    }
                }
            }
        }
        Some(PointValue { u, grad_u: gu, alpha, matrix: side > 0 })
    }

    /// Elasticity law and effective degradation at a point value.
    pub fn energy_density_at(&self, pv: &PointValue) -> (f64, Tensor2) {
        let off = 0.5 * (pv.grad_u[0][1] + pv.grad_u[1][0]);
        let strain = [[pv.grad_u[0][0], off], [off, pv.grad_u[1][1]]];
        let (law, g) = if pv.matrix {
            (&self.matrix_law, degradation(pv.alpha, &self.material).0 + self.residual_stiffness)
        } else {
            (&self.inclusion_law, 1.0)
        };
        let s = law.stress(&strain);
        (g * law.energy_density(&strain), [[g * s[0][0], g * s[0][1]], [g * s[1][0], g * s[1][1]]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub u: [f64; 2],
    pub grad_u: [[f64; 2]; 2],
    pub alpha: f64,
    pub matrix: bool,
}

#[inline]
fn scatter_vec(rep: &Rep, v: f64, out: &mut [f64]) {
    match rep {
        Rep::Free(k) => out[*k] += v,
        Rep::Fixed(_) => {}
        Rep::Combo { terms, .. } => {
            for (k, w) in terms {
                out[*k] += w * v;
            }
        }
    }
}

#[inline]
fn scatter_mat(p: &Pattern, ri: &Rep, rj: &Rep, v: f64, out: &mut [f64]) {
    let mut add = |r: usize, c: usize, val: f64| {
        if r >= c {
            out[p.position(r, c)] += val;
        }
    };
    match (ri, rj) {
        (Rep::Fixed(_), _) | (_, Rep::Fixed(_)) => {}
        (Rep::Free(a), Rep::Free(b)) => add(*a, *b, v),
        (Rep::Free(a), Rep::Combo { terms, .. }) => {
            for (b, w) in terms {
                add(*a, *b, w * v);
            }
        }
        (Rep::Combo { terms, .. }, Rep::Free(b)) => {
            for (a, w) in terms {
                add(*a, *b, w * v);
            }
        }
        (Rep::Combo { terms: ta, .. }, Rep::Combo { terms: tb, .. }) => {
            for (a, wa) in ta {
                for (b, wb) in tb {
                    add(*a, *b, wa * wb * v);
                }
            }
        }
    }
}

fn build_local(mesh: &AdaptiveMesh, disc: &Discretization, dofs: &DofMap) -> Vec<LocalCell> {
    (0..mesh.n_cells())
        .map(|c| {
            let verts = mesh.cell_vertices(c);
            let mut full = Vec::with_capacity(20);
            for &v in &verts {
                full.push(dofs.disp_index(v, 0));
                full.push(dofs.disp_index(v, 1));
            }
            let mut enr_corner = Vec::new();
            if disc.cells[c].cut {
                for (a, &v) in verts.iter().enumerate() {
                    if let Some(e) = disc.enrichment[v] {
                        enr_corner.push(a);
                        full.push(dofs.enr_index(e, 0));
                        full.push(dofs.enr_index(e, 1));
                    }
                }
            }
            for &v in &verts {
                full.push(dofs.alpha_index(v));
            }
            LocalCell { full, enr_corner }
        })
        .collect()
}

fn build_pattern(dofs: &DofMap, local: &[LocalCell]) -> Pattern {
    let n = dofs.n_free();
    let mut cols: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
    let mut idx = Vec::new();
    for lc in local {
        idx.clear();
        for &f in &lc.full {
            match dofs.rep(f) {
                Rep::Free(k) => idx.push(*k),
                Rep::Fixed(_) => {}
                Rep::Combo { terms, .. } => idx.extend(terms.iter().map(|t| t.0)),
            }
        }
        idx.sort_unstable();
        idx.dedup();
        for (a, &c) in idx.iter().enumerate() {
            cols[c].extend_from_slice(&idx[a..]);
        }
    }
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut diag = Vec::with_capacity(n);
    col_ptr.push(0);
    for (c, mut rows) in cols.into_iter().enumerate() {
        rows.sort_unstable();
        rows.dedup();
        diag.push(row_idx.len() + rows.binary_search(&c).unwrap());
        row_idx.extend(rows);
        col_ptr.push(row_idx.len());
    }
    Pattern { n, col_ptr, row_idx, diag }
}
