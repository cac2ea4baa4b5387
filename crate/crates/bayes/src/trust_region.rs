//! Successive domain reduction: a box centered on the incumbent whose edges
//! grow on success and shrink on failure.

use crate::surrogate::Bounds;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrustRegionConfig {
    pub expand: f64,
    pub shrink: f64,
    /// Smallest edge as a fraction of the global edge.
    pub min_fraction: f64,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self { expand: 1.3, shrink: 0.7, min_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRegion {
    /// Nominal edge lengths before clipping.
    pub edges: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TrustRegion {
    pub fn global(global: &Bounds) -> Self {
        Self {
            edges: global.lower.iter().zip(&global.upper).map(|(l, u)| u - l).collect(),
            lower: global.lower.clone(),
            upper: global.upper.clone(),
        }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.lower.clone(), self.upper.clone())
    }

    /// Rescales the edges, recenters on `center` and clips to `global`.
    pub fn update(&mut self, center: &[f64], success: bool, global: &Bounds, cfg: &TrustRegionConfig) {
        let factor = if success { cfg.expand } else { cfg.shrink };
        for k in 0..self.edges.len() {
            let g = global.upper[k] - global.lower[k];
            self.edges[k] = (self.edges[k] * factor).clamp(cfg.min_fraction * g, g);
            let half = 0.5 * self.edges[k];
            self.lower[k] = (center[k] - half).max(global.lower[k]);
            self.upper[k] = (center[k] + half).min(global.upper[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Bounds {
        Bounds::new(vec![0.0, 0.0], vec![1.0, 2.0])
    }

    #[test]
    fn repeated_failures_reach_the_floor() {
        let g = unit();
        let mut tr = TrustRegion::global(&g);
        for _ in 0..50 {
            tr.update(&[0.5, 1.0], false, &g, &TrustRegionConfig::default());
        }
        assert!((tr.edges[0] - 0.1).abs() < 1e-12 && (tr.edges[1] - 0.2).abs() < 1e-12);
        assert!((tr.upper[0] - tr.lower[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn expansion_at_corner_is_clipped() {
        let g = unit();
        let mut tr = TrustRegion::global(&g);
        tr.update(&[1.0, 2.0], true, &g, &TrustRegionConfig::default());
        assert_eq!(tr.upper, vec![1.0, 2.0]);
        assert!((tr.lower[0] - 0.5).abs() < 1e-12 && (tr.lower[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_factors_restore_edges() {
        let g = unit();
        let cfg = TrustRegionConfig { expand: 1.0 / 0.7, shrink: 0.7, min_fraction: 0.1 };
        let mut tr = TrustRegion::global(&g);
        tr.update(&[0.5, 1.0], false, &g, &cfg);
        tr.update(&[0.5, 1.0], false, &g, &cfg);
        let e = tr.edges.clone();
        tr.update(&[0.5, 1.0], false, &g, &cfg);
        tr.update(&[0.5, 1.0], true, &g, &cfg);
        for k in 0..2 {
            assert!((tr.edges[k] - e[k]).abs() < 1e-12);
        }
    }
}
