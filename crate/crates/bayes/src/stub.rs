//! Analytic two-parameter test problem with four scenarios and a
//! nonconvex feasible set (two circular holes in the unit square).

use crate::campaign::Evaluator;
use crate::surrogate::Bounds;

const PEAK: [f64; 2] = [0.55, 0.6];
const HOLES: [([f64; 2], f64); 2] = [(PEAK, 0.18), ([0.25, 0.3], 0.12)];

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticStub;

impl AnalyticStub {
    pub fn bounds() -> Bounds {
        Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0])
    }

    fn scenario_peak(s: usize) -> [f64; 2] {
        let a = std::f64::consts::FRAC_PI_2 * s as f64;
        [PEAK[0] + 0.04 * a.cos(), PEAK[1] + 0.04 * a.sin()]
    }

    pub fn value(x: &[f64], s: usize) -> f64 {
        let p = Self::scenario_peak(s);
        (-10.0 * ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2))).exp()
    }

    pub fn worst_case(x: &[f64]) -> f64 {
        (0..4).map(|s| Self::value(x, s)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance to a hole boundary, negative inside a hole.
    pub fn clearance(x: &[f64]) -> f64 {
        HOLES
            .iter()
            .map(|(c, r)| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt() - r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_feasible(x: &[f64]) -> bool {
        Self::clearance(x) >= 0.0
    }

    /// Best feasible worst-case value on an `n × n` vertex grid.
    pub fn grid_optimum(n: usize) -> (Vec<f64>, f64) {
        let mut best = (vec![f64::NAN; 2], f64::NEG_INFINITY);
        for i in 0..n {
            for j in 0..n {
                let x = [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64];
                if Self::is_feasible(&x) {
                    let f = Self::worst_case(&x);
                    if f > best.1 {
                        best = (x.to_vec(), f);
                    }
                }
            }
        }
        best
    }
}

impl Evaluator for AnalyticStub {
    fn n_scenarios(&self) -> usize {
        4
    }

    fn evaluate(&self, x: &[f64], scenario: usize) -> std::result::Result<f64, String> {
        Ok(Self::value(x, scenario))
    }
}
