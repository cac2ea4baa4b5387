//! Cell quadrature: tensor Gauss on uncut cells, clipped sub-triangles and
//! an interface line rule on cells cut by the zero level set.

/// Bulk integration point in reference coordinates with its physical weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkPoint {
    pub xi: [f64; 2],
    pub weight: f64,
    /// +1 in the matrix, −1 inside an inclusion.
    pub side: i8,
}

/// Interface integration point; `normal` points away from the inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint {
    pub xi: [f64; 2],
    pub weight: f64,
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellQuadrature {
    pub bulk: Vec<BulkPoint>,
    pub interface: Vec<InterfacePoint>,
    pub cut: bool,
    /// Reference-area fractions of the matrix and inclusion sides.
    pub side_fractions: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Regular(CellQuadrature),
    /// The linear interface reconstruction is ambiguous (saddle); refine.
    Ambiguous,
}

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Reference corners ordered counter-clockwise from the lower-left.
pub const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

/// 2×2 Gauss rule on a cell of side `h`, all points on `side`.
pub fn tensor_gauss(h: f64, side: i8) -> Vec<BulkPoint> {
    let w = 0.25 * h * h;
    let mut out = Vec::with_capacity(4);
    for y in GAUSS2 {
        for x in GAUSS2 {
            out.push(BulkPoint { xi: [x, y], weight: w, side });
        }
    }
    out
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Three interior points per fan triangle of a convex polygon.
fn triangulate(poly: &[[f64; 2]], h: f64, side: i8, out: &mut Vec<BulkPoint>) {
    const BARY: [[f64; 3]; 3] = [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];
    for k in 1..poly.len().saturating_sub(1) {
        let (a, b, c) = (poly[0], poly[k], poly[k + 1]);
        let area = polygon_area(&[a, b, c]).abs();
        if area <= 0.0 {
            continue;
        }
        for l in BARY {
            let xi = [l[0] * a[0] + l[1] * b[0] + l[2] * c[0], l[0] * a[1] + l[1] * b[1] + l[2] * c[1]];
            out.push(BulkPoint { xi, weight: area * h * h / 3.0, side });
        }
    }
}

/// Builds the quadrature of a square cell of side `h` from corner level-set
/// values (no exact zeros expected).
pub fn classify(psi: [f64; 4], h: f64) -> Classification {
    let sign = |v: f64| if v >= 0.0 { 1i8 } else { -1i8 };
    let s = psi.map(sign);
    if s.iter().all(|&x| x == s[0]) {
        let frac = if s[0] > 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        return Classification::Regular(CellQuadrature { bulk: tensor_gauss(h, s[0]), interface: Vec::new(), cut: false, side_fractions: frac });
    }
    let mut crossings = Vec::new();
    let mut poly_plus = Vec::new();
    let mut poly_minus = Vec::new();
    for k in 0..4 {
        let (p, q) = (CORNERS[k], CORNERS[(k + 1) % 4]);
        let (a, b) = (psi[k], psi[(k + 1) % 4]);
        if s[k] > 0 { poly_plus.push(p) } else { poly_minus.push(p) }
        if s[k] != s[(k + 1) % 4] {
            let t = a / (a - b);
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            crossings.push(x);
            poly_plus.push(x);
            poly_minus.push(x);
        }
    }
    if crossings.len() != 2 {
        return Classification::Ambiguous;
    }
    let area_plus = polygon_area(&poly_plus).abs();
    let area_minus = polygon_area(&poly_minus).abs();
    let mut bulk = Vec::with_capacity(3 * (poly_plus.len() + poly_minus.len()));
    triangulate(&poly_plus, h, 1, &mut bulk);
    triangulate(&poly_minus, h, -1, &mut bulk);
    let (p, q) = (crossings[0], crossings[1]);
    let d = [q[0] - p[0], q[1] - p[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let mut interface = Vec::new();
    if len > 0.0 {
        let mut n = [d[1] / len, -d[0] / len];
        // Orient towards the matrix side using the bilinear level-set gradient at the midpoint.
        let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let g = [
            (psi[1] - psi[0]) * (1.0 - m[1]) + (psi[2] - psi[3]) * m[1],
            (psi[3] - psi[0]) * (1.0 - m[0]) + (psi[2] - psi[1]) * m[0],
        ];
        if n[0] * g[0] + n[1] * g[1] < 0.0 {
            n = [-n[0], -n[1]];
        }
        for t in GAUSS2 {
            interface.push(InterfacePoint { xi: [p[0] + t * d[0], p[1] + t * d[1]], weight: 0.5 * len * h, normal: n });
        }
    }
    Classification::Regular(CellQuadrature { bulk, interface, cut: true, side_fractions: [area_plus, area_minus] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regular(c: Classification) -> CellQuadrature {
        match c {
            Classification::Regular(q) => q,
            Classification::Ambiguous => panic!("ambiguous"),
        }
    }

    #[test]
    fn uncut_cell_has_four_points() {
        let q = regular(classify([1.0, 2.0, 3.0, 0.5], 0.3));
        assert_eq!(q.bulk.len(), 4);
        let s: f64 = q.bulk.iter().map(|p| p.weight).sum();
        assert!((s - 0.09).abs() < 1e-15);
        assert!(!q.cut);
    }

    #[test]
    fn bisected_cell_splits_area() {
        // ψ = x − 0.5 in reference coordinates
        let h = 0.7;
        let q = regular(classify([-0.5, 0.5, 0.5, -0.5], h));
        let plus: f64 = q.bulk.iter().filter(|p| p.side > 0).map(|p| p.weight).sum();
        let minus: f64 = q.bulk.iter().filter(|p| p.side < 0).map(|p| p.weight).sum();
        assert!((plus - 0.5 * h * h).abs() < 1e-10);
        assert!((minus - 0.5 * h * h).abs() < 1e-10);
        let len: f64 = q.interface.iter().map(|p| p.weight).sum();
        assert!((len - h).abs() < 1e-12);
        for p in &q.interface {
            assert!((p.normal[0] - 1.0).abs() < 1e-12 && p.normal[1].abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_is_ambiguous() {
        assert_eq!(classify([1.0, -1.0, 1.0, -1.0], 1.0), Classification::Ambiguous);
    }
}
