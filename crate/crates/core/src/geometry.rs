//! Periodic elliptical inclusion layouts, level-set queries and the
//! inter-inclusion clearance used as the feasibility constraint.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

/// Fixed RVE width.
pub const RVE_WIDTH: f64 = 15.0;

/// Crack-offset fractions used for the worst-case objective.
pub const CRACK_OFFSETS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

/// Number of polygon vertices used to approximate an ellipse in clearance queries.
pub const POLYGON_SIDES: usize = 256;

/// The nine microstructure parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignVector {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
    pub x5: f64,
    pub x6: f64,
    pub x7: f64,
    pub x8: f64,
    pub x9: f64,
}

impl Default for DesignVector {
    /// Staggered lattice of circles of radius 2.5 with height 6.
    fn default() -> Self {
        Self { x1: 0.5, x2: 0.5, x3: 2.5, x4: 2.5, x5: 0.0, x6: 2.5, x7: 2.5, x8: 0.0, x9: 6.0 }
    }
}

impl DesignVector {
    pub const DIM: usize = 9;
    pub const NAMES: [&'static str; 9] = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9"];

    pub fn to_array(&self) -> [f64; 9] {
        [self.x1, self.x2, self.x3, self.x4, self.x5, self.x6, self.x7, self.x8, self.x9]
    }

    pub fn from_array(a: [f64; 9]) -> Self {
        Self { x1: a[0], x2: a[1], x3: a[2], x4: a[3], x5: a[4], x6: a[5], x7: a[6], x8: a[7], x9: a[8] }
    }

    pub fn from_slice(s: &[f64]) -> Option<Self> {
        let a: [f64; 9] = s.try_into().ok()?;
        Some(Self::from_array(a))
    }

    /// Global bounds `(lower, upper)` of every component.
    pub fn bounds() -> ([f64; 9], [f64; 9]) {
        (
            [0.0, 0.0, 2.5, 2.5, 0.0, 2.5, 2.5, -FRAC_PI_2, 6.0],
            [0.5, 0.5, 5.0, 5.0, FRAC_PI_2, 5.0, 5.0, FRAC_PI_2, 15.0],
        )
    }

    pub fn in_bounds(&self) -> bool {
        let (lo, hi) = Self::bounds();
        self.to_array()
            .iter()
            .zip(lo.iter().zip(hi.iter()))
            .all(|(v, (l, h))| *v >= *l - 1e-12 && *v <= *h + 1e-12)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let i = Self::NAMES.iter().position(|n| *n == name)?;
        Some(self.to_array()[i])
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match Self::NAMES.iter().position(|n| *n == name) {
            Some(i) => {
                let mut a = self.to_array();
                a[i] = value;
                *self = Self::from_array(a);
                true
            }
            None => false,
        }
    }
}

/// Axis-aligned rectangle `[0, lx] × [−ly/2, ly/2]`; the initial crack runs
/// along `y = 0` from `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Domain {
    pub lx: f64,
    pub ly: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self { lx: 100.0, ly: 30.0 }
    }
}

impl Domain {
    pub fn x_range(&self) -> (f64, f64) {
        (0.0, self.lx)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (-0.5 * self.ly, 0.5 * self.ly)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= 0.0 && p[0] <= self.lx && p[1].abs() <= 0.5 * self.ly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub radii: [f64; 2],
    pub orientation: f64,
}

impl Ellipse {
    pub fn new(center: [f64; 2], radii: [f64; 2], orientation: f64) -> Self {
        assert!(radii[0] > 0.0 && radii[1] > 0.0, "ellipse radii must be positive");
        Self { center, radii, orientation }
    }

    pub fn circle(center: [f64; 2], r: f64) -> Self {
        Self::new(center, [r, r], 0.0)
    }

    fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.orientation.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        [c * dx + s * dy, -s * dx + c * dy]
    }

    /// Point on the boundary at parameter `t`.
    pub fn point(&self, t: f64) -> [f64; 2] {
        let (s, c) = self.orientation.sin_cos();
        let lx = self.radii[0] * t.cos();
        let ly = self.radii[1] * t.sin();
        [self.center[0] + c * lx - s * ly, self.center[1] + s * lx + c * ly]
    }

    /// Normalized radial coordinate; below 1 inside.
    pub fn rho(&self, p: [f64; 2]) -> f64 {
        let q = self.to_local(p);
        ((q[0] / self.radii[0]).powi(2) + (q[1] / self.radii[1]).powi(2)).sqrt()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let q = self.to_local(p);
        (q[0] / self.radii[0]).powi(2) + (q[1] / self.radii[1]).powi(2) < 1.0
    }

    /// Signed approximate distance `(ρ − 1)/|∇ρ|`: exact for circles,
    /// negative inside.
    pub fn level_set(&self, p: [f64; 2]) -> f64 {
        let q = self.to_local(p);
        let (a, b) = (self.radii[0], self.radii[1]);
        let rho = ((q[0] / a).powi(2) + (q[1] / b).powi(2)).sqrt();
        if rho < 1e-300 {
            return -a.min(b);
        }
        let c = q[0] / (a * rho);
        let s = q[1] / (b * rho);
        let grad = ((c / a).powi(2) + (s / b).powi(2)).sqrt();
        (rho - 1.0) / grad
    }

    /// Radius of the bounding circle.
    pub fn bounding_radius(&self) -> f64 {
        self.radii[0].max(self.radii[1])
    }

    /// Half extents of the axis-aligned bounding box.
    pub fn half_extents(&self) -> [f64; 2] {
        let (s, c) = self.orientation.sin_cos();
        let (a, b) = (self.radii[0], self.radii[1]);
        [((a * c).powi(2) + (b * s).powi(2)).sqrt(), ((a * s).powi(2) + (b * c).powi(2)).sqrt()]
    }

    pub fn translated(&self, d: [f64; 2]) -> Self {
        Self { center: [self.center[0] + d[0], self.center[1] + d[1]], ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionLayout {
    pub ellipses: Vec<Ellipse>,
    /// (width, height) of the periodic cell.
    pub rve: (f64, f64),
    pub crack_offset: f64,
}

impl InclusionLayout {
    pub fn empty() -> Self {
        Self { ellipses: Vec::new(), rve: (RVE_WIDTH, 1.0), crack_offset: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.ellipses.is_empty()
    }

    /// Keeps only ellipses whose bounding box stays at least `strip` inside the
    /// domain, so no interface reaches the pinned boundary ring.
    pub fn restricted_to(&self, domain: &Domain, strip: f64) -> Self {
        let (x0, x1) = domain.x_range();
        let (y0, y1) = domain.y_range();
        let ellipses = self
            .ellipses
            .iter()
            .filter(|e| {
                let h = e.half_extents();
                e.center[0] - h[0] >= x0 + strip
                    && e.center[0] + h[0] <= x1 - strip
                    && e.center[1] - h[1] >= y0 + strip
                    && e.center[1] + h[1] <= y1 - strip
            })
            .copied()
            .collect();
        Self { ellipses, ..self.clone() }
    }

    /// One ellipse per line: `cx cy r1 r2 theta`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.ellipses {
            let _ = writeln!(
                s,
                "{} {} {} {} {}",
                e.center[0], e.center[1], e.radii[0], e.radii[1], e.orientation
            );
        }
        s
    }
}

/// Tiles both inclusion sets over the domain plus a one-period margin.
pub fn build_layout(x: &DesignVector, w: f64, domain: &Domain) -> InclusionLayout {
    let width = RVE_WIDTH;
    let height = x.x9;
    let (x0, x1) = domain.x_range();
    let (y0, y1) = domain.y_range();
    let (xl, xh) = (x0 - width, x1 + width);
    let (yl, yh) = (y0 - height, y1 + height);
    let shift = w * height;
    let sets = [
        ([0.0, shift], [x.x3, x.x4], x.x5),
        ([x.x1 * width, x.x2 * height + shift], [x.x6, x.x7], x.x8),
    ];
    let i_lo = ((xl - width) / width).floor() as i64;
    let i_hi = ((xh + width) / width).ceil() as i64;
    let j_lo = ((yl - 2.0 * height) / height).floor() as i64;
    let j_hi = ((yh + 2.0 * height) / height).ceil() as i64;
    let mut ellipses = Vec::new();
    for (offset, radii, theta) in sets {
        for j in j_lo..=j_hi {
            for i in i_lo..=i_hi {
                let c = [i as f64 * width + offset[0], j as f64 * height + offset[1]];
                if c[0] >= xl && c[0] <= xh && c[1] >= yl && c[1] <= yh {
                    ellipses.push(Ellipse::new(c, radii, theta));
                }
            }
        }
    }
    InclusionLayout { ellipses, rve: (width, height), crack_offset: w }
}

/// Signed distance-like value: negative inside any inclusion, positive in
/// the matrix. Returns `+∞` for an empty layout.
pub fn level_set(layout: &InclusionLayout, p: [f64; 2]) -> f64 {
    nearest_inclusion(layout, p).map_or(f64::INFINITY, |(_, v)| v)
}

/// Index of the inclusion attaining the minimum level-set value.
pub fn nearest_inclusion(layout: &InclusionLayout, p: [f64; 2]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, e) in layout.ellipses.iter().enumerate() {
        let dx = p[0] - e.center[0];
        let dy = p[1] - e.center[1];
        let lower = (dx * dx + dy * dy).sqrt() - e.bounding_radius();
        if let Some((_, b)) = best {
            if lower >= b {
                continue;
            }
        }
        let v = e.level_set(p);
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// clearance

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Regular-parameter inscribed polygon of an ellipse.
#[derive(Debug, Clone)]
struct EllipsePolygon {
    ellipse: Ellipse,
    n: usize,
}

impl EllipsePolygon {
    fn new(ellipse: Ellipse, n: usize) -> Self {
        Self { ellipse, n }
    }

    fn param(&self, k: usize) -> f64 {
        2.0 * PI * (k % self.n) as f64 / self.n as f64
    }

    fn vertex(&self, k: usize) -> [f64; 2] {
        self.ellipse.point(self.param(k))
    }

    /// Index of the vertex maximizing `d · v`: the grid parameter nearest
    /// to the analytic maximizer of a sinusoid.
    fn support_index(&self, d: [f64; 2]) -> usize {
        let (s, c) = self.ellipse.orientation.sin_cos();
        let dl = [c * d[0] + s * d[1], -s * d[0] + c * d[1]];
        let t = (self.ellipse.radii[1] * dl[1]).atan2(self.ellipse.radii[0] * dl[0]);
        let step = 2.0 * PI / self.n as f64;
        let k = (t / step).round() as i64;
        k.rem_euclid(self.n as i64) as usize
    }
}

/// GJK closest-distance between two convex polygons given by support maps.
/// Returns `None` when the polygons intersect.
fn gjk_distance(a: &EllipsePolygon, b: &EllipsePolygon) -> Option<(f64, usize, usize)> {
    // Minkowski difference points carry the generating vertex indices.
    let support = |d: [f64; 2]| {
        let ia = a.support_index(d);
        let ib = b.support_index([-d[0], -d[1]]);
        (sub(a.vertex(ia), b.vertex(ib)), ia, ib)
    };
    let mut simplex: Vec<([f64; 2], usize, usize)> = Vec::with_capacity(3);
    let init = sub(a.ellipse.center, b.ellipse.center);
    let d0 = if dot(init, init) > 0.0 { [-init[0], -init[1]] } else { [1.0, 0.0] };
    simplex.push(support([-d0[0], -d0[1]]));
    let mut closest = simplex[0].0;
    for _ in 0..256 {
        let dist2 = dot(closest, closest);
        if dist2 < 1e-24 {
            return None;
        }
        let w = support([-closest[0], -closest[1]]);
        // No progress towards the origin: converged.
        if dist2 - dot(closest, w.0) <= 1e-12 * dist2.max(1e-12) {
            break;
        }
        simplex.push(w);
        match reduce_simplex(&mut simplex) {
            Some(p) => closest = p,
            None => return None,
        }
    }
    // Recover witness indices from the closest simplex feature.
    let (ia, ib) = match simplex.len() {
        1 => (simplex[0].1, simplex[0].2),
        _ => {
            let (p, q) = (simplex[0], simplex[1]);
            let e = sub(q.0, p.0);
            let t = (-dot(p.0, e) / dot(e, e).max(1e-300)).clamp(0.0, 1.0);
            if t < 0.5 { (p.1, p.2) } else { (q.1, q.2) }
        }
    };
    Some((dot(closest, closest).sqrt(), ia, ib))
}

/// Reduces the simplex to the feature closest to the origin and returns the
/// closest point; `None` if the origin is enclosed.
fn reduce_simplex(s: &mut Vec<([f64; 2], usize, usize)>) -> Option<[f64; 2]> {
    match s.len() {
        2 => {
            let (a, b) = (s[0].0, s[1].0);
            let e = sub(b, a);
            let t = -dot(a, e) / dot(e, e).max(1e-300);
            if t <= 0.0 {
                s.remove(1);
                Some(a)
            } else if t >= 1.0 {
                s.remove(0);
                Some(b)
            } else {
                Some([a[0] + t * e[0], a[1] + t * e[1]])
            }
        }
        3 => {
            let (a, b, c) = (s[0].0, s[1].0, s[2].0);
            let cross = |u: [f64; 2], v: [f64; 2]| u[0] * v[1] - u[1] * v[0];
            let area = cross(sub(b, a), sub(c, a));
            let s0 = cross(sub(b, a), [-a[0], -a[1]]) * area;
            let s1 = cross(sub(c, b), [-b[0], -b[1]]) * area;
            let s2 = cross(sub(a, c), [-c[0], -c[1]]) * area;
            if s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0 {
                return None;
            }
            // Closest of the three edges.
            let mut best: Option<(f64, [f64; 2], [usize; 2])> = None;
            for (i, j) in [(0usize, 1usize), (1, 2), (2, 0)] {
                let (p, q) = (s[i].0, s[j].0);
                let e = sub(q, p);
                let t = (-dot(p, e) / dot(e, e).max(1e-300)).clamp(0.0, 1.0);
                let x = [p[0] + t * e[0], p[1] + t * e[1]];
                let d = dot(x, x);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, x, [i, j]));
                }
            }
            let (_, x, [i, j]) = best.unwrap();
            let keep = [s[i], s[j]];
            s.clear();
            s.extend_from_slice(&keep);
            Some(x)
        }
        _ => Some(s[0].0),
    }
}

/// Minimum overlap along the edge normals of both polygons (separating-axis
/// penetration depth estimate).
fn sat_penetration(a: &EllipsePolygon, b: &EllipsePolygon) -> f64 {
    let mut best = f64::INFINITY;
    for poly in [a, b] {
        for k in 0..poly.n {
            let p = poly.vertex(k);
            let q = poly.vertex(k + 1);
            let e = sub(q, p);
            let len = dot(e, e).sqrt();
            let nrm = [e[1] / len, -e[0] / len];
            let amax = dot(a.vertex(a.support_index(nrm)), nrm);
            let amin = dot(a.vertex(a.support_index([-nrm[0], -nrm[1]])), nrm);
            let bmax = dot(b.vertex(b.support_index(nrm)), nrm);
            let bmin = dot(b.vertex(b.support_index([-nrm[0], -nrm[1]])), nrm);
            let overlap = amax.min(bmax) - amin.max(bmin);
            best = best.min(overlap);
        }
    }
    best
}

/// Golden-section refinement of the closest boundary points of two separated
/// ellipses starting from polygon witness parameters.
fn refine_distance(e1: &Ellipse, e2: &Ellipse, t1: f64, t2: f64, half: f64) -> f64 {
    let dist = |a: f64, b: f64| {
        let p = e1.point(a);
        let q = e2.point(b);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    let golden = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..60 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        0.5 * (a + b)
    };
    let (mut a, mut b) = (t1, t2);
    let mut best = dist(a, b);
    for _ in 0..64 {
        a = golden(&|s| dist(s, b), a - half, a + half);
        b = golden(&|s| dist(a, s), b - half, b + half);
        let d = dist(a, b);
        if best - d < 1e-14 {
            best = best.min(d);
            break;
        }
        best = d;
    }
    best
}

/// Signed gap between two ellipse boundaries: positive separation, negative
/// penetration depth when they overlap.
pub fn pair_clearance(e1: &Ellipse, e2: &Ellipse) -> f64 {
    let a = EllipsePolygon::new(*e1, POLYGON_SIDES);
    let b = EllipsePolygon::new(*e2, POLYGON_SIDES);
    match gjk_distance(&a, &b) {
        Some((d, ia, ib)) => {
            let step = 2.0 * PI / POLYGON_SIDES as f64;
            let refined = refine_distance(e1, e2, a.param(ia), b.param(ib), 2.0 * step);
            // Inscribed polygons can only overestimate the true gap.
            refined.min(d)
        }
        None => -sat_penetration(&a, &b),
    }
}

/// Minimum gap over all distinct inclusion pairs of the layout.
pub fn clearance(layout: &InclusionLayout) -> f64 {
    assert!(!layout.ellipses.is_empty(), "clearance of an empty layout");
    let mut order: Vec<usize> = (0..layout.ellipses.len()).collect();
    let es = &layout.ellipses;
    order.sort_by(|&i, &j| es[i].center[0].total_cmp(&es[j].center[0]).then(i.cmp(&j)));
    let rmax = es.iter().map(|e| e.bounding_radius()).fold(0.0, f64::max);
    let mut best = f64::INFINITY;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            let (a, b) = (&es[i], &es[j]);
            let dx = b.center[0] - a.center[0];
            if dx - 2.0 * rmax > best {
                break;
            }
            let dy = b.center[1] - a.center[1];
            let lower = (dx * dx + dy * dy).sqrt() - a.bounding_radius() - b.bounding_radius();
            if lower >= best {
                continue;
            }
            best = best.min(pair_clearance(a, b));
        }
    }
    if best.is_finite() { best } else { f64::INFINITY }
}

/// Reference patch around one RVE used for the feasibility check.
pub fn reference_domain(x: &DesignVector) -> Domain {
    Domain { lx: RVE_WIDTH, ly: x.x9 }
}

/// Clearance of the periodic microstructure of `x` (independent of the crack offset).
pub fn design_clearance(x: &DesignVector) -> f64 {
    clearance(&build_layout(x, 0.0, &reference_domain(x)))
}

pub fn is_feasible(x: &DesignVector, z_min: f64) -> bool {
    design_clearance(x) >= z_min
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(e1: Ellipse, e2: Ellipse) -> InclusionLayout {
        InclusionLayout { ellipses: vec![e1, e2], rve: (RVE_WIDTH, 6.0), crack_offset: 0.0 }
    }

    #[test]
    fn circle_level_set_values() {
        let e = Ellipse::circle([1.0, 2.0], 2.5);
        let l = two(e, Ellipse::circle([100.0, 0.0], 2.5));
        assert!((level_set(&l, [1.0, 2.0]) + 2.5).abs() < 1e-14);
        assert!(level_set(&l, [3.5, 2.0]).abs() < 1e-14);
        assert!((level_set(&l, [5.0, 2.0]) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn ellipse_boundary_is_zero_level() {
        let e = Ellipse::new([0.3, -0.2], [4.0, 2.5], 0.7);
        for k in 0..50 {
            let p = e.point(k as f64 * 0.13);
            assert!(e.level_set(p).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_pair_clearance() {
        let c1 = Ellipse::circle([0.0, 0.0], 2.5);
        let c2 = Ellipse::circle([10.0, 0.0], 2.5);
        assert!((clearance(&two(c1, c2)) - 5.0).abs() < 1e-9);
        let coincident = clearance(&two(c1, c1));
        assert!((coincident + 5.0).abs() < 1e-3, "{coincident}");
    }

    #[test]
    fn setup_a_staggered_clearance() {
        let x = DesignVector::default();
        let staggered = (7.5f64 * 7.5 + 3.0 * 3.0).sqrt() - 5.0;
        assert!((staggered - 3.0777).abs() < 1e-4);
        let a = Ellipse::circle([0.0, 0.0], 2.5);
        let b = Ellipse::circle([7.5, 3.0], 2.5);
        assert!((pair_clearance(&a, &b) - staggered).abs() < 1e-8);
        // Vertical neighbours of the same set are one period (6) apart.
        assert!((design_clearance(&x) - 1.0).abs() < 1e-8, "{}", design_clearance(&x));
        assert!(is_feasible(&x, 0.5));
        assert!(!is_feasible(&x, 1.5));
    }

    #[test]
    fn degenerate_offset_is_infeasible() {
        let x = DesignVector { x1: 0.0, x2: 0.0, ..Default::default() };
        assert!(design_clearance(&x) < 0.0);
        assert!(!is_feasible(&x, 0.0));
    }

    #[test]
    fn crack_offset_shifts_layout() {
        let x = DesignVector { x9: 10.0, ..Default::default() };
        let d = Domain { lx: 60.0, ly: 30.0 };
        let a = build_layout(&x, 0.0, &d);
        let b = build_layout(&x, 0.5, &d);
        for e in &b.ellipses {
            let src = [e.center[0], e.center[1] - 5.0];
            let inside_margin = e.center[1] - 5.0 >= d.y_range().0 - x.x9;
            if inside_margin {
                assert!(a.ellipses.iter().any(|f| (f.center[0] - src[0]).abs() < 1e-12
                    && (f.center[1] - src[1]).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn layout_text_export() {
        let l = two(Ellipse::circle([0.0, 0.0], 2.5), Ellipse::new([1.0, 2.0], [3.0, 4.0], 0.5));
        let t = l.to_text();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "1 2 3 4 0.5");
    }

    #[test]
    fn restriction_removes_boundary_touching() {
        let d = Domain { lx: 40.0, ly: 16.0 };
        let l = two(Ellipse::circle([20.0, 0.0], 3.0), Ellipse::circle([20.0, 7.0], 3.0));
        let r = l.restricted_to(&d, 1.0);
        assert_eq!(r.ellipses.len(), 1);
        assert_eq!(r.ellipses[0].center, [20.0, 0.0]);
    }
}
