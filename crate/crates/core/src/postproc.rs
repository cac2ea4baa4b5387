//! J-integral evaluation and effective-toughness extraction.

use crate::assembly::System;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One accepted time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JSample {
    pub step: usize,
    pub t: f64,
    pub tip: [f64; 2],
    pub crack_length: f64,
    pub j: f64,
    pub energy: f64,
    pub n_dofs: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JTrace {
    pub samples: Vec<JSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToughnessReport {
    pub g_eff: f64,
    pub window: (f64, f64),
    pub half_width: usize,
    pub n_samples: usize,
}

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// `e₁·[Ψ I − (∇u)ᵀσ]·n` at a point with outward normal `n`.
fn eshelby_flux(system: &System, full: &[f64], p: [f64; 2], n: [f64; 2]) -> f64 {
    let Some(pv) = system.evaluate_at(full, p) else {
        return 0.0;
    };
    let (psi, s) = system.energy_density_at(&pv);
    let du = [pv.grad_u[0][0], pv.grad_u[1][0]];
    let mut flux = psi * n[0];
    for i in 0..2 {
        for j in 0..2 {
            flux -= du[i] * s[i][j] * n[j];
        }
    }
    flux
}

/// J-integral over the outer boundary with two Gauss points per boundary facet.
pub fn j_integral(system: &System, full: &[f64]) -> f64 {
    let mesh = &system.mesh;
    let (nx, ny) = mesh.lattice_extent();
    let mut j = 0.0;
    for key in mesh.cells() {
        let s = mesh.lattice_size(key);
        let (ix, iy) = (key.i * s, key.j * s);
        let o = mesh.cell_origin(key);
        let h = mesh.cell_size(key);
        let mut facets: Vec<([f64; 2], [f64; 2], [f64; 2])> = Vec::new();
        if ix == 0 {
            facets.push((o, [o[0], o[1] + h], [-1.0, 0.0]));
        }
        if ix + s == nx {
            facets.push(([o[0] + h, o[1]], [o[0] + h, o[1] + h], [1.0, 0.0]));
        }
        if iy == 0 {
            facets.push((o, [o[0] + h, o[1]], [0.0, -1.0]));
        }
        if iy + s == ny {
            facets.push(([o[0], o[1] + h], [o[0] + h, o[1] + h], [0.0, 1.0]));
        }
        for (a, b, n) in facets {
            for t in GAUSS2 {
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                j += 0.5 * h * eshelby_flux(system, full, p, n);
            }
        }
    }
    j
}

/// J-integral along the counter-clockwise rectangle `[x0, x1] × [y0, y1]`
/// with `n` Gauss segments per side.
pub fn j_contour(system: &System, full: &[f64], rect: [f64; 4], n: usize) -> f64 {
    let [x0, y0, x1, y1] = rect;
    let sides = [
        ([x0, y0], [x1, y0], [0.0, -1.0]),
        ([x1, y0], [x1, y1], [1.0, 0.0]),
        ([x1, y1], [x0, y1], [0.0, 1.0]),
        ([x0, y1], [x0, y0], [-1.0, 0.0]),
    ];
    let mut j = 0.0;
    for (a, b, nrm) in sides {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let seg = len / n as f64;
        for k in 0..n {
            for t in GAUSS2 {
                let f = (k as f64 + t) / n as f64;
                let p = [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
                j += 0.5 * seg * eshelby_flux(system, full, p, nrm);
            }
        }
    }
    j
}

/// Centered moving average with a window truncated at the ends.
pub fn moving_average(values: &[f64], half_width: usize) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Smoothed maximum of J over samples with `tip_x` inside the window.
pub fn effective_toughness(trace: &JTrace, window: (f64, f64), half_width: usize) -> Result<ToughnessReport> {
    let js: Vec<f64> = trace
        .samples
        .iter()
        .filter(|s| s.tip[0] >= window.0 && s.tip[0] <= window.1)
        .map(|s| s.j)
        .collect();
    if js.is_empty() {
        return Err(Error::EmptyWindow { lo: window.0, hi: window.1 });
    }
    let g_eff = moving_average(&js, half_width).into_iter().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    Ok(ToughnessReport { g_eff, window, half_width, n_samples: js.len() })
}

/// Minimum over the scenario values; every offset must be present and successful.
pub fn worst_case_objective(reports: &[(f64, Option<f64>)], offsets: &[f64]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for &w in offsets {
        let v = reports
            .iter()
            .find(|(rw, _)| (rw - w).abs() < 1e-12)
            .and_then(|(_, v)| *v)
            .ok_or(Error::MissingScenario(w))?;
        worst = worst.min(v);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(js: &[f64]) -> JTrace {
        JTrace {
            samples: js
                .iter()
                .enumerate()
                .map(|(k, &j)| JSample { step: k, t: k as f64, tip: [k as f64, 0.0], crack_length: k as f64, j, energy: 0.0, n_dofs: 0 })
                .collect(),
        }
    }

    #[test]
    fn constant_trace() {
        let r = effective_toughness(&trace(&[2.3; 12]), (0.0, 100.0), 3).unwrap();
        assert!((r.g_eff - 2.3).abs() < 1e-14);
    }

    #[test]
    fn spike_is_suppressed() {
        let mut js = vec![1.0; 21];
        js[10] = 10.0;
        let r = effective_toughness(&trace(&js), (0.0, 100.0), 3).unwrap();
        assert!((r.g_eff - 16.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(matches!(effective_toughness(&trace(&[1.0; 5]), (50.0, 80.0), 3), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn worst_case() {
        let w = [0.0, 0.25, 0.5, 0.75];
        let r: Vec<(f64, Option<f64>)> = w.iter().zip([1.2, 0.9, 1.5, 1.1]).map(|(a, b)| (*a, Some(b))).collect();
        assert_eq!(worst_case_objective(&r, &w).unwrap(), 0.9);
        let mut bad = r.clone();
        bad[2].1 = None;
        assert!(worst_case_objective(&bad, &w).is_err());
        assert!(worst_case_objective(&r[..3], &w).is_err());
    }
}
