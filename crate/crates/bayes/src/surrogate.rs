//! Independent per-scenario GPs on inputs normalized to the current bounds,
//! and the Monte-Carlo batch UCB acquisition of the worst-case composite.

use crate::error::{BayesError, Result};
use crate::gp::{psd_cholesky, Gp, GpConfig};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u), "lower bounds must not exceed upper bounds");
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| if u > l { (v - l) / (u - l) } else { 0.0 })
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.lower.iter().zip(&self.upper)).map(|(v, (l, h))| l + v * (h - l)).collect()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| if u > l { rng.random_range(*l..*u) } else { *l }).collect()
    }
}

/// One GP per scenario sharing the input normalization.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub gps: Vec<Gp>,
    pub bounds: Bounds,
}

impl Surrogate {
    /// `y[s][i]` is the output of scenario `s` at design `x[i]`.
    pub fn fit<R: Rng>(x: &[Vec<f64>], y: &[Vec<f64>], bounds: &Bounds, cfg: &GpConfig, rng: &mut R) -> Result<Self> {
        if x.len() < 2 {
            return Err(BayesError::InvalidInput("at least two training designs are required".into()));
        }
        let u: Vec<Vec<f64>> = x.iter().map(|p| bounds.to_unit(p)).collect();
        let gps = y.iter().map(|ys| Gp::fit(&u, ys, cfg, rng)).collect::<Result<Vec<_>>>()?;
        Ok(Self { gps, bounds: bounds.clone() })
    }

    pub fn n_scenarios(&self) -> usize {
        self.gps.len()
    }

    /// Posterior mean of every scenario at `x`.
    pub fn mean(&self, x: &[f64]) -> Vec<f64> {
        let u = self.bounds.to_unit(x);
        self.gps.iter().map(|g| g.predict(&u).0).collect()
    }
}

/// Fixed standard-normal draws `[draw][scenario][batch point]`.
#[derive(Debug, Clone)]
pub struct BaseSamples {
    z: Vec<f64>,
    n_mc: usize,
    n_scenarios: usize,
    q: usize,
}

impl BaseSamples {
    pub fn new<R: Rng>(n_mc: usize, n_scenarios: usize, q: usize, rng: &mut R) -> Self {
        let z = (0..n_mc * n_scenarios * q).map(|_| rng.sample(StandardNormal)).collect();
        Self { z, n_mc, n_scenarios, q }
    }

    fn get(&self, m: usize, s: usize, j: usize) -> f64 {
        self.z[(m * self.n_scenarios + s) * self.q + j]
    }
}

/// Composite worst-case samples `f̃[m][j]` at the batch points.
pub fn composite_samples(surrogate: &Surrogate, batch: &[Vec<f64>], base: &BaseSamples) -> Vec<Vec<f64>> {
    let q = batch.len();
    assert!(q <= base.q && surrogate.n_scenarios() <= base.n_scenarios);
    let u: Vec<Vec<f64>> = batch.iter().map(|p| surrogate.bounds.to_unit(p)).collect();
    let mut out = vec![vec![f64::INFINITY; q]; base.n_mc];
    for (s, gp) in surrogate.gps.iter().enumerate() {
        let (mean, cov) = gp.joint(&u);
        let l = psd_cholesky(&cov);
        for (m, row) in out.iter_mut().enumerate() {
            for i in 0..q {
                let mut v = mean[i];
                for k in 0..=i {
                    v += l[(i, k)] * base.get(m, s, k);
                }
                row[i] = row[i].min(v);
            }
        }
    }
    out
}

fn ucb_draws(surrogate: &Surrogate, batch: &[Vec<f64>], beta: f64, base: &BaseSamples) -> Vec<f64> {
    let samples = composite_samples(surrogate, batch, base);
    let m = samples.len() as f64;
    let q = batch.len();
    let mean: Vec<f64> = (0..q).map(|j| samples.iter().map(|r| r[j]).sum::<f64>() / m).collect();
    let c = (beta * std::f64::consts::PI / 2.0).sqrt();
    samples
        .iter()
        .map(|r| (0..q).map(|j| mean[j] + c * (r[j] - mean[j]).abs()).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// Batch UCB of the worst-case composite:
/// mean over draws of `max_j [μ_j + √(βπ/2)·|f̃_j − μ_j|]`, with `μ_j` the
/// Monte-Carlo mean of the composite at point `j`.
pub fn acquisition(surrogate: &Surrogate, batch: &[Vec<f64>], beta: f64, base: &BaseSamples) -> f64 {
    let v = ucb_draws(surrogate, batch, beta, base);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Monte-Carlo standard error of the acquisition estimate.
pub fn acquisition_standard_error(surrogate: &Surrogate, batch: &[Vec<f64>], beta: f64, base: &BaseSamples) -> f64 {
    let v = ucb_draws(surrogate, batch, beta, base);
    let m = v.len() as f64;
    let avg = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (var / m).sqrt()
}
