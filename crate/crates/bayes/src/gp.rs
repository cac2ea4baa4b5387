//! Gaussian-process regression with an anisotropic Matérn-5/2 kernel and
//! type-II maximum-likelihood hyperparameters.

use crate::error::{BayesError, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::{Deserialize, Serialize};

const SQRT5: f64 = 2.236_067_977_499_79;
const JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    pub lengthscale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    /// Noise variance bounds in standardized units; equal bounds fix the noise.
    pub noise_bounds: (f64, f64),
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            lengthscale_bounds: (1e-2, 10.0),
            signal_variance_bounds: (5e-2, 20.0),
            noise_bounds: (1e-6, 1.0),
            restarts: 5,
            max_iter: 200,
        }
    }
}

impl GpConfig {
    /// Interpolating configuration for noise-free data.
    pub fn noise_free() -> Self {
        Self { noise_bounds: (1e-10, 1e-10), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl Hyperparameters {
    fn to_log(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lengthscales.iter().map(|l| l.ln()).collect();
        v.push(self.signal_variance.ln());
        v.push(self.noise_variance.ln());
        v
    }

    fn from_log(v: &[f64]) -> Self {
        let d = v.len() - 2;
        Self {
            lengthscales: v[..d].iter().map(|x| x.exp()).collect(),
            signal_variance: v[d].exp(),
            noise_variance: v[d + 1].exp(),
        }
    }
}

/// Matérn-5/2 covariance between two inputs.
pub fn matern52(a: &[f64], b: &[f64], lengthscales: &[f64], signal_variance: f64) -> f64 {
    let r2: f64 = a.iter().zip(b).zip(lengthscales).map(|((x, y), l)| ((x - y) / l).powi(2)).sum();
    let r = r2.sqrt();
    signal_variance * (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * (-SQRT5 * r).exp()
}

/// Single-output GP on standardized targets.
#[derive(Debug, Clone)]
pub struct Gp {
    x: Vec<Vec<f64>>,
    hyper: Hyperparameters,
    y_mean: f64,
    y_scale: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

/// Mean, scale and standardized targets. Constant data keeps unit scale, so
/// the likelihood floors the signal variance.
fn standardize(y: &[f64]) -> (f64, f64, DVector<f64>) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let scale = if var.sqrt() > 1e-12 * mean.abs().max(1.0) { var.sqrt() } else { 1.0 };
    (mean, scale, DVector::from_iterator(y.len(), y.iter().map(|v| (v - mean) / scale)))
}

fn covariance(x: &[Vec<f64>], h: &Hyperparameters) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = matern52(&x[i], &x[j], &h.lengthscales, h.signal_variance);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += h.noise_variance + JITTER;
    }
    k
}

/// Negative log marginal likelihood and its gradient in log parameters.
fn nll(x: &[Vec<f64>], y: &DVector<f64>, logp: &[f64]) -> Option<(f64, Vec<f64>)> {
    let h = Hyperparameters::from_log(logp);
    let n = x.len();
    let d = h.lengthscales.len();
    let chol = Cholesky::new(covariance(x, &h))?;
    let alpha = chol.solve(y);
    let logdet: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum();
    let value = 0.5 * y.dot(&alpha) + logdet + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    // W = K⁻¹ − ααᵀ; ∂nll/∂θ = ½ tr(W ∂K/∂θ).
    let w = chol.inverse() - &alpha * alpha.transpose();
    let mut grad = vec![0.0; d + 2];
    for i in 0..n {
        for j in 0..n {
            let wij = w[(i, j)];
            let mut r2 = 0.0;
            for k in 0..d {
                r2 += ((x[i][k] - x[j][k]) / h.lengthscales[k]).powi(2);
            }
            let r = r2.sqrt();
            let e = (-SQRT5 * r).exp();
            let common = h.signal_variance * 5.0 / 3.0 * (1.0 + SQRT5 * r) * e;
            for k in 0..d {
                grad[k] += 0.5 * wij * common * ((x[i][k] - x[j][k]) / h.lengthscales[k]).powi(2);
            }
            grad[d] += 0.5 * wij * h.signal_variance * (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * e;
        }
        grad[d + 1] += 0.5 * w[(i, i)] * h.noise_variance;
    }
    Some((value, grad))
}

fn log_bounds(cfg: &GpConfig, d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![cfg.lengthscale_bounds.0.ln(); d];
    let mut hi = vec![cfg.lengthscale_bounds.1.ln(); d];
    lo.push(cfg.signal_variance_bounds.0.ln());
    hi.push(cfg.signal_variance_bounds.1.ln());
    lo.push(cfg.noise_bounds.0.ln());
    hi.push(cfg.noise_bounds.1.ln());
    (lo, hi)
}

/// Projected gradient descent with Barzilai-Borwein steps and Armijo backtracking.
fn minimize_nll(x: &[Vec<f64>], y: &DVector<f64>, start: Vec<f64>, lo: &[f64], hi: &[f64], max_iter: usize) -> Option<(f64, Vec<f64>)> {
    let project = |p: &mut Vec<f64>| {
        for (k, v) in p.iter_mut().enumerate() {
            *v = v.clamp(lo[k], hi[k]);
        }
    };
    let mut p = start;
    project(&mut p);
    let (mut f, mut g) = nll(x, y, &p)?;
    let mut step = 0.1;
    for _ in 0..max_iter {
        let mut accepted = None;
        let mut s = step;
        for _ in 0..30 {
            let mut q: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a - s * b).collect();
            project(&mut q);
            let dec: f64 = p.iter().zip(&q).zip(&g).map(|((a, b), gi)| gi * (a - b)).sum();
            if let Some((fq, gq)) = nll(x, y, &q) {
                if fq <= f - 1e-4 * dec {
                    accepted = Some((q, fq, gq));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((q, fq, gq)) = accepted else { break };
        let sk: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
        let yk: Vec<f64> = gq.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = sk.iter().zip(&yk).map(|(a, b)| a * b).sum();
        let ss: f64 = sk.iter().map(|a| a * a).sum();
        step = if sy > 1e-16 { (ss / sy).clamp(1e-4, 10.0) } else { 0.1 };
        let converged = (f - fq).abs() < 1e-9 * f.abs().max(1.0) && ss.sqrt() < 1e-7;
        p = q;
        f = fq;
        g = gq;
        if converged {
            break;
        }
    }
    Some((f, p))
}

impl Gp {
    /// Fits hyperparameters by multi-start maximum likelihood.
    pub fn fit<R: Rng>(x: &[Vec<f64>], y: &[f64], cfg: &GpConfig, rng: &mut R) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(BayesError::InvalidInput("training inputs and outputs must be non-empty and of equal length".into()));
        }
        let d = x[0].len();
        let ys = standardize(y).2;
        let (lo, hi) = log_bounds(cfg, d);

        let default = Hyperparameters {
            lengthscales: vec![0.5f64.clamp(cfg.lengthscale_bounds.0, cfg.lengthscale_bounds.1); d],
            signal_variance: 1.0f64.clamp(cfg.signal_variance_bounds.0, cfg.signal_variance_bounds.1),
            noise_variance: 1e-4f64.clamp(cfg.noise_bounds.0, cfg.noise_bounds.1),
        };
        let mut starts = vec![default.to_log()];
        for _ in 1..cfg.restarts.max(1) {
            starts.push((0..d + 2).map(|k| if hi[k] > lo[k] { rng.random_range(lo[k]..hi[k]) } else { lo[k] }).collect());
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for s in starts {
            if let Some((f, p)) = minimize_nll(x, &ys, s, &lo, &hi, cfg.max_iter) {
                if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                    best = Some((f, p));
                }
            }
        }
        let (_, p) = best.ok_or_else(|| BayesError::Numerical("covariance factorization failed for every start".into()))?;
        Self::with_hyperparameters(x, y, Hyperparameters::from_log(&p))
    }

    /// GP with fixed hyperparameters (targets are standardized internally).
    pub fn with_hyperparameters(x: &[Vec<f64>], y: &[f64], hyper: Hyperparameters) -> Result<Self> {
        let (y_mean, y_scale, ys) = standardize(y);
        let chol = Cholesky::new(covariance(x, &hyper)).ok_or_else(|| BayesError::Numerical("covariance is not positive definite".into()))?;
        let alpha = chol.solve(&ys);
        Ok(Self { x: x.to_vec(), hyper, y_mean, y_scale, chol, alpha })
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn n_train(&self) -> usize {
        self.x.len()
    }

    fn cross(&self, pts: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(self.x.len(), pts.len(), |i, j| matern52(&self.x[i], &pts[j], &self.hyper.lengthscales, self.hyper.signal_variance))
    }

    /// Posterior mean and variance of the latent function at one point.
    pub fn predict(&self, p: &[f64]) -> (f64, f64) {
        let (m, c) = self.joint(&[p.to_vec()]);
        (m[0], c[(0, 0)])
    }

    /// Joint posterior mean and covariance of the latent function at `pts`.
    pub fn joint(&self, pts: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
        let ks = self.cross(pts);
        let mean = ks.transpose() * &self.alpha;
        let v = self.chol.l().solve_lower_triangular(&ks).expect("triangular factor is nonsingular");
        let q = pts.len();
        let mut cov = DMatrix::from_fn(q, q, |i, j| matern52(&pts[i], &pts[j], &self.hyper.lengthscales, self.hyper.signal_variance));
        cov -= v.transpose() * v;
        let s2 = self.y_scale * self.y_scale;
        for i in 0..q {
            for j in 0..q {
                cov[(i, j)] *= s2;
            }
            cov[(i, i)] = cov[(i, i)].max(0.0);
        }
        (mean.iter().map(|m| self.y_mean + self.y_scale * m).collect(), cov)
    }
}

/// Lower factor of a positive semi-definite matrix; non-positive pivots give
/// zero columns, so repeated points produce identical samples.
pub fn psd_cholesky(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut l = DMatrix::zeros(n, n);
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 1e-12 * scale {
            continue;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_at_zero_distance_is_signal_variance() {
        assert!((matern52(&[0.3, 0.1], &[0.3, 0.1], &[0.2, 0.4], 2.5) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn likelihood_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let y = DVector::from_iterator(12, x.iter().map(|p| (3.0 * p[0]).sin() + p[1] * p[1]));
        let p = vec![(0.3f64).ln(), (0.7f64).ln(), (1.3f64).ln(), (1e-3f64).ln()];
        let (_, g) = nll(&x, &y, &p).unwrap();
        for k in 0..p.len() {
            let h = 1e-6;
            let mut a = p.clone();
            a[k] += h;
            let mut b = p.clone();
            b[k] -= h;
            let fd = (nll(&x, &y, &a).unwrap().0 - nll(&x, &y, &b).unwrap().0) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-5 * fd.abs().max(1.0), "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn two_point_interpolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let gp = Gp::fit(&[vec![0.0], vec![1.0]], &[1.0, 3.0], &GpConfig::noise_free(), &mut rng).unwrap();
        assert!((gp.predict(&[0.0]).0 - 1.0).abs() < 1e-6);
        assert!((gp.predict(&[1.0]).0 - 3.0).abs() < 1e-6);
        let (_, var) = gp.predict(&[0.0]);
        assert!(var <= 1e-6 * gp.hyperparameters().signal_variance * 1.0f64.max(gp.y_scale.powi(2)));
    }

    #[test]
    fn far_point_reverts_to_training_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = vec![vec![0.1], vec![0.4], vec![0.5], vec![0.9]];
        let y = [1.0, 2.0, 0.5, 1.5];
        let gp = Gp::fit(&x, &y, &GpConfig::noise_free(), &mut rng).unwrap();
        let (m, _) = gp.predict(&[1e4]);
        assert!((m - 1.25).abs() < 1e-9);
    }

    #[test]
    fn constant_data_is_handled() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gp = Gp::fit(&[vec![0.0], vec![0.5], vec![1.0]], &[2.0; 3], &GpConfig::default(), &mut rng).unwrap();
        let (m, v) = gp.predict(&[0.25]);
        assert!((m - 2.0).abs() < 1e-9 && v >= 0.0);
    }

    #[test]
    fn psd_factor_of_repeated_point() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 2.0, 2.0]);
        let l = psd_cholesky(&a);
        assert!((&l * l.transpose() - &a).norm() < 1e-12);
        assert_eq!(l[(1, 1)], 0.0);
    }
}
