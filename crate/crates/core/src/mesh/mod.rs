//! Adaptive quadtree of square bilinear cells on an integer lattice with
//! single hanging-node constraints.
//!
//! Positions live on a lattice of spacing `h_min`; a cell of level `l` spans
//! `2^(max_level − l)` lattice units, so every vertex has exact integer
//! coordinates.

pub mod adapt;
pub mod vtk;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::f64::consts::PI;

pub use adapt::{execute_adaptation, find_crack_tip, mark_coarsen, mark_refine, Adaptation, MarkParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub level: u8,
    pub i: i64,
    pub j: i64,
}

impl CellKey {
    pub fn new(level: u8, i: i64, j: i64) -> Self {
        Self { level, i, j }
    }

    pub fn children(&self) -> [CellKey; 4] {
        let (l, i, j) = (self.level + 1, 2 * self.i, 2 * self.j);
        [CellKey::new(l, i, j), CellKey::new(l, i + 1, j), CellKey::new(l, i, j + 1), CellKey::new(l, i + 1, j + 1)]
    }

    pub fn parent(&self) -> Option<CellKey> {
        (self.level > 0).then(|| CellKey::new(self.level - 1, self.i.div_euclid(2), self.j.div_euclid(2)))
    }
}

/// Lattice-unit (ix, iy) vertex coordinates.
pub type VertexKey = (i64, i64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HangingVertex {
    pub vertex: usize,
    pub masters: [usize; 2],
    /// Level of the coarse cell whose edge carries the vertex.
    pub coarse_level: u8,
}

#[derive(Debug, Clone)]
pub struct AdaptiveMesh {
    origin: [f64; 2],
    h_min: f64,
    max_level: u8,
    nx0: i64,
    ny0: i64,
    active: BTreeSet<CellKey>,
    generation: u64,
    cells: Vec<CellKey>,
    cell_index: HashMap<CellKey, usize>,
    vertices: Vec<VertexKey>,
    vertex_index: HashMap<VertexKey, usize>,
    cell_vertices: Vec<[usize; 4]>,
    hanging: Vec<HangingVertex>,
    hanging_of: Vec<Option<usize>>,
}

impl AdaptiveMesh {
    /// Uniform root grid of `nx0 × ny0` cells of size `h_min·2^max_level`.
    pub fn new_grid(origin: [f64; 2], h_min: f64, max_level: u8, nx0: i64, ny0: i64) -> Self {
        assert!(h_min > 0.0 && nx0 > 0 && ny0 > 0);
        let active = (0..ny0).flat_map(|j| (0..nx0).map(move |i| CellKey::new(0, i, j))).collect();
        let mut m = Self {
            origin,
            h_min,
            max_level,
            nx0,
            ny0,
            active,
            generation: 0,
            cells: Vec::new(),
            cell_index: HashMap::new(),
            vertices: Vec::new(),
            vertex_index: HashMap::new(),
            cell_vertices: Vec::new(),
            hanging: Vec::new(),
            hanging_of: Vec::new(),
        };
        m.rebuild();
        m
    }

    /// Root grid over the domain: the finest size is `h_min` and the root size is
    /// the largest `h_min·2^L` not exceeding the damage bandwidth `π·eps` that
    /// tiles the domain.
    pub fn for_domain(domain: &Domain, h_min: f64, eps: f64) -> Result<Self> {
        let tiles = |len: f64, h: f64| {
            let n = len / h;
            ((n - n.round()).abs() < 1e-9 * n.max(1.0)).then(|| n.round() as i64)
        };
        let mut chosen = None;
        for level in 0..=12u8 {
            let h0 = h_min * f64::powi(2.0, level as i32);
            if h0 > PI * eps + 1e-12 && level > 0 {
                break;
            }
            if let (Some(nx), Some(ny)) = (tiles(domain.lx, h0), tiles(domain.ly, h0)) {
                chosen = Some((level, nx, ny));
            }
        }
        let (level, nx, ny) = chosen.ok_or_else(|| {
            Error::InvalidInput(format!(
                "domain {}×{} is not a multiple of the finest cell size {h_min}",
                domain.lx, domain.ly
            ))
        })?;
        Ok(Self::new_grid([0.0, -0.5 * domain.ly], h_min, level, nx, ny))
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Lattice extent `(nx, ny)` in units of `h_min`.
    pub fn lattice_extent(&self) -> (i64, i64) {
        let s = 1i64 << self.max_level;
        (self.nx0 * s, self.ny0 * s)
    }

    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let (nx, ny) = self.lattice_extent();
        (self.origin, [self.origin[0] + nx as f64 * self.h_min, self.origin[1] + ny as f64 * self.h_min])
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn cells(&self) -> &[CellKey] {
        &self.cells
    }

    pub fn cell_index(&self, key: &CellKey) -> Option<usize> {
        self.cell_index.get(key).copied()
    }

    pub fn is_active(&self, key: &CellKey) -> bool {
        self.active.contains(key)
    }

    pub fn cell_vertices(&self, c: usize) -> [usize; 4] {
        self.cell_vertices[c]
    }

    /// Cell size in lattice units.
    pub fn lattice_size(&self, key: &CellKey) -> i64 {
        1i64 << (self.max_level - key.level)
    }

    pub fn cell_size(&self, key: &CellKey) -> f64 {
        self.lattice_size(key) as f64 * self.h_min
    }

    /// Lower-left corner of a cell.
    pub fn cell_origin(&self, key: &CellKey) -> [f64; 2] {
        let s = self.lattice_size(key);
        self.lattice_point(key.i * s, key.j * s)
    }

    pub fn lattice_point(&self, ix: i64, iy: i64) -> [f64; 2] {
        [self.origin[0] + ix as f64 * self.h_min, self.origin[1] + iy as f64 * self.h_min]
    }

    pub fn vertex_key(&self, v: usize) -> VertexKey {
        self.vertices[v]
    }

    pub fn vertex_index(&self, key: VertexKey) -> Option<usize> {
        self.vertex_index.get(&key).copied()
    }

    pub fn vertex_position(&self, v: usize) -> [f64; 2] {
        let (ix, iy) = self.vertices[v];
        self.lattice_point(ix, iy)
    }

    pub fn vertex_positions(&self) -> Vec<[f64; 2]> {
        (0..self.vertices.len()).map(|v| self.vertex_position(v)).collect()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let (ix, iy) = self.vertices[v];
        let (nx, ny) = self.lattice_extent();
        ix == 0 || iy == 0 || ix == nx || iy == ny
    }

    /// Hanging vertices ordered so that masters are always resolved first.
    pub fn hanging(&self) -> &[HangingVertex] {
        &self.hanging
    }

    pub fn hanging_masters(&self, v: usize) -> Option<[usize; 2]> {
        self.hanging_of[v].map(|k| self.hanging[k].masters)
    }

    pub fn is_hanging(&self, v: usize) -> bool {
        self.hanging_of[v].is_some()
    }

    /// Overwrites hanging-vertex values by the average of their edge masters.
    pub fn apply_constraints(&self, values: &mut [f64], ncomp: usize) {
        debug_assert_eq!(values.len(), ncomp * self.vertices.len());
        for h in &self.hanging {
            for k in 0..ncomp {
                values[ncomp * h.vertex + k] =
                    0.5 * (values[ncomp * h.masters[0] + k] + values[ncomp * h.masters[1] + k]);
            }
        }
    }

    /// Active leaf containing a point given in lattice units.
    fn leaf_at_lattice(&self, px: f64, py: f64) -> Option<CellKey> {
        let (nx, ny) = self.lattice_extent();
        if px < 0.0 || py < 0.0 || px >= nx as f64 || py >= ny as f64 {
            return None;
        }
        for level in 0..=self.max_level {
            let s = (1i64 << (self.max_level - level)) as f64;
            let key = CellKey::new(level, (px / s).floor() as i64, (py / s).floor() as i64);
            if self.active.contains(&key) {
                return Some(key);
            }
        }
        None
    }

    /// Active cell containing `p` with the local coordinates `(ξ, η) ∈ [0,1]²`.
    /// Points on the outer boundary are assigned to the adjacent cell.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let (nx, ny) = self.lattice_extent();
        let mut px = (p[0] - self.origin[0]) / self.h_min;
        let mut py = (p[1] - self.origin[1]) / self.h_min;
        let tol = 1e-9;
        if px < -tol || py < -tol || px > nx as f64 + tol || py > ny as f64 + tol {
            return None;
        }
        px = px.clamp(0.0, nx as f64 * (1.0 - 1e-15) - 1e-12);
        py = py.clamp(0.0, ny as f64 * (1.0 - 1e-15) - 1e-12);
        let key = self.leaf_at_lattice(px, py)?;
        let o = self.cell_origin(&key);
        let h = self.cell_size(&key);
        let xi = [((p[0] - o[0]) / h).clamp(0.0, 1.0), ((p[1] - o[1]) / h).clamp(0.0, 1.0)];
        Some((self.cell_index[&key], xi))
    }

    /// Bilinear interpolation of a resolved nodal field at `p`.
    pub fn interpolate(&self, values: &[f64], ncomp: usize, p: [f64; 2], out: &mut [f64]) -> bool {
        match self.locate(p) {
            Some((c, xi)) => {
                let n = bilinear(xi);
                let vs = self.cell_vertices[c];
                for k in 0..ncomp {
                    out[k] = (0..4).map(|a| n[a] * values[ncomp * vs[a] + k]).sum();
                }
                true
            }
            None => false,
        }
    }

    /// Distinct active cells sharing a vertex or edge with `key` (balanced mesh).
    pub fn neighbors(&self, key: &CellKey) -> Vec<CellKey> {
        let s = self.lattice_size(key) as f64;
        let (x0, y0) = (key.i as f64 * s, key.j as f64 * s);
        let d = 0.25;
        let mut samples = Vec::with_capacity(12);
        for f in [0.25, 0.75] {
            samples.push((x0 - d, y0 + f * s));
            samples.push((x0 + s + d, y0 + f * s));
            samples.push((x0 + f * s, y0 - d));
            samples.push((x0 + f * s, y0 + s + d));
        }
        samples.extend([(x0 - d, y0 - d), (x0 + s + d, y0 - d), (x0 - d, y0 + s + d), (x0 + s + d, y0 + s + d)]);
        let mut out: Vec<CellKey> = samples.into_iter().filter_map(|(x, y)| self.leaf_at_lattice(x, y)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Leaves across each edge sampled at `n` evenly spaced points.
    fn edge_neighbors(&self, key: &CellKey, n: usize) -> Vec<CellKey> {
        let s = self.lattice_size(key) as f64;
        let (x0, y0) = (key.i as f64 * s, key.j as f64 * s);
        let d = 0.25f64.min(s / (4 * n) as f64);
        let mut out = Vec::new();
        for k in 0..n {
            let f = (2 * k + 1) as f64 / (2 * n) as f64 * s;
            for (x, y) in [(x0 - d, y0 + f), (x0 + s + d, y0 + f), (x0 + f, y0 - d), (x0 + f, y0 + s + d)] {
                if let Some(c) = self.leaf_at_lattice(x, y) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// True when every pair of edge-adjacent active cells differs by at most one level.
    pub fn is_balanced(&self) -> bool {
        self.cells.iter().all(|k| self.edge_neighbors(k, 4).iter().all(|n| (n.level as i32 - k.level as i32).abs() <= 1))
    }

    /// Splits the given active cells and enforces 2:1 balance. Returns the
    /// number of cells split.
    pub fn refine(&mut self, marks: &[CellKey]) -> usize {
        let mut queue: VecDeque<CellKey> = marks.iter().copied().collect();
        let mut split = 0;
        while let Some(key) = queue.pop_front() {
            if !self.active.contains(&key) || key.level >= self.max_level {
                continue;
            }
            self.active.remove(&key);
            for ch in key.children() {
                self.active.insert(ch);
            }
            split += 1;
            // Neighbors more than one level coarser than the children must split.
            for n in self.edge_neighbors(&key, 2) {
                if n.level < key.level {
                    queue.push_back(n);
                }
            }
        }
        if split > 0 {
            self.rebuild();
        }
        split
    }

    /// Merges sibling quadruples whose children are all marked, skipping any
    /// merge that would break 2:1 balance. Returns the number of merges.
    pub fn coarsen(&mut self, marks: &[CellKey], protected: &[CellKey]) -> usize {
        let marked: BTreeSet<CellKey> = marks.iter().copied().collect();
        let protected: BTreeSet<CellKey> = protected.iter().copied().collect();
        let parents: BTreeSet<CellKey> = marked.iter().filter_map(|k| k.parent()).collect();
        let mut merged = 0;
        for p in parents {
            let ch = p.children();
            if !ch.iter().all(|c| marked.contains(c) && self.active.contains(c) && !protected.contains(c)) {
                continue;
            }
            for c in &ch {
                self.active.remove(c);
            }
            self.active.insert(p);
            let ok = self.edge_neighbors(&p, 4).iter().all(|n| n.level <= p.level + 1);
            if ok {
                merged += 1;
            } else {
                self.active.remove(&p);
                for c in ch {
                    self.active.insert(c);
                }
            }
        }
        if merged > 0 {
            self.rebuild();
        }
        merged
    }

    fn rebuild(&mut self) {
        self.generation += 1;
        self.cells = self.active.iter().copied().collect();
        self.cell_index = self.cells.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        let mut keys: Vec<VertexKey> = Vec::with_capacity(self.cells.len() + 64);
        for c in &self.cells {
            let s = 1i64 << (self.max_level - c.level);
            let (x0, y0) = (c.i * s, c.j * s);
            keys.extend([(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)]);
        }
        keys.sort_by_key(|&(x, y)| (y, x));
        keys.dedup();
        self.vertex_index = keys.iter().enumerate().map(|(k, v)| (*v, k)).collect();
        self.vertices = keys;
        self.cell_vertices = self
            .cells
            .iter()
            .map(|c| {
                let s = 1i64 << (self.max_level - c.level);
                let (x0, y0) = (c.i * s, c.j * s);
                [(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)].map(|k| self.vertex_index[&k])
            })
            .collect();
        let mut hanging = Vec::new();
        for c in &self.cells {
            let s = 1i64 << (self.max_level - c.level);
            if s < 2 {
                continue;
            }
            let (x0, y0) = (c.i * s, c.j * s);
            let h = s / 2;
            let edges = [
                ((x0 + h, y0), (x0, y0), (x0 + s, y0)),
                ((x0 + s, y0 + h), (x0 + s, y0), (x0 + s, y0 + s)),
                ((x0 + h, y0 + s), (x0, y0 + s), (x0 + s, y0 + s)),
                ((x0, y0 + h), (x0, y0), (x0, y0 + s)),
            ];
            for (m, a, b) in edges {
                if let Some(&v) = self.vertex_index.get(&m) {
                    hanging.push(HangingVertex {
                        vertex: v,
                        masters: [self.vertex_index[&a], self.vertex_index[&b]],
                        coarse_level: c.level,
                    });
                }
            }
        }
        hanging.sort_by_key(|h| (h.coarse_level, h.vertex));
        self.hanging_of = vec![None; self.vertices.len()];
        for (k, h) in hanging.iter().enumerate() {
            self.hanging_of[h.vertex] = Some(k);
        }
        self.hanging = hanging;
    }

    /// Bilinear transfer of a resolved nodal field from `old` onto this mesh:
    /// coincident vertices are injected, new ones interpolated in the old leaf.
    pub fn transfer_from(&self, old: &AdaptiveMesh, values: &[f64], ncomp: usize) -> Vec<f64> {
        let mut out = vec![0.0; ncomp * self.vertices.len()];
        let mut tmp = vec![0.0; ncomp];
        for (v, key) in self.vertices.iter().enumerate() {
            if let Some(ov) = old.vertex_index(*key) {
                out[ncomp * v..ncomp * (v + 1)].copy_from_slice(&values[ncomp * ov..ncomp * (ov + 1)]);
            } else {
                let ok = old.interpolate(values, ncomp, self.vertex_position(v), &mut tmp);
                debug_assert!(ok);
                out[ncomp * v..ncomp * (v + 1)].copy_from_slice(&tmp);
            }
        }
        out
    }

    pub fn cell_levels(&self) -> Vec<u8> {
        self.cells.iter().map(|c| c.level).collect()
    }
}

/// Bilinear shape functions on the unit square, corners ordered
/// counter-clockwise from the lower-left.
pub fn bilinear(xi: [f64; 2]) -> [f64; 4] {
    let (x, y) = (xi[0], xi[1]);
    [(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y]
}

/// Gradients of [`bilinear`] with respect to the reference coordinates.
pub fn bilinear_grad(xi: [f64; 2]) -> [[f64; 2]; 4] {
    let (x, y) = (xi[0], xi[1]);
    [[-(1.0 - y), -(1.0 - x)], [1.0 - y, -x], [y, x], [-y, 1.0 - x]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_size_choice() {
        let m = AdaptiveMesh::for_domain(&Domain { lx: 40.0, ly: 16.0 }, 0.2, 0.5).unwrap();
        assert_eq!(m.max_level(), 2);
        assert_eq!(m.n_cells(), 50 * 20);
        let m = AdaptiveMesh::for_domain(&Domain { lx: 100.0, ly: 30.0 }, 0.2, 0.5).unwrap();
        assert_eq!(m.max_level(), 1);
        assert_eq!(m.n_cells(), 250 * 75);
    }

    #[test]
    fn refine_creates_hanging_vertices() {
        let mut m = AdaptiveMesh::new_grid([0.0, 0.0], 0.25, 2, 3, 3);
        assert!(m.hanging().is_empty());
        m.refine(&[CellKey::new(0, 1, 1)]);
        assert_eq!(m.n_cells(), 12);
        assert_eq!(m.hanging().len(), 4);
        assert!(m.is_balanced());
        // A second refinement of a child forces neighbor splits.
        m.refine(&[CellKey::new(1, 2, 2)]);
        assert!(m.is_balanced());
    }

    #[test]
    fn locate_and_interpolate_bilinear() {
        let mut m = AdaptiveMesh::new_grid([-1.0, 2.0], 0.5, 1, 2, 2);
        m.refine(&[CellKey::new(0, 0, 0)]);
        let f = |p: [f64; 2]| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1];
        let vals: Vec<f64> = m.vertex_positions().iter().map(|p| f(*p)).collect();
        let mut out = [0.0];
        for p in [[-0.3, 2.1], [0.9, 3.9], [0.0, 3.0], [-1.0, 2.0], [1.0, 4.0]] {
            assert!(m.interpolate(&vals, 1, p, &mut out));
            // bilinear inside each cell; the global field is bilinear so exact
            assert!((out[0] - f(p)).abs() < 1e-12, "{p:?}");
        }
    }
}
