//! Primal-dual interior-point Newton method for smooth energies with box
//! constraints on a subset of the unknowns.

use super::linear::SparseCholesky;
use crate::assembly::Pattern;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Twice-differentiable objective with a fixed Hessian sparsity pattern.
pub trait Objective {
    fn pattern(&self) -> &Pattern;
    fn energy(&self, x: &[f64]) -> f64;
    fn energy_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);
    /// Lower-triangular Hessian values in pattern order.
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IpmOptions {
    pub mu_init: f64,
    pub tol: f64,
    pub acceptable_tol: f64,
    pub max_iter: usize,
    pub bound_push: f64,
    pub tau_min: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { mu_init: 1e-9, tol: 1e-8, acceptable_tol: 1e-6, max_iter: 300, bound_push: 1e-8, tau_min: 0.99 }
    }
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub x: Vec<f64>,
    /// Multipliers of the lower and upper bounds.
    pub z_lower: Vec<f64>,
    pub z_upper: Vec<f64>,
    pub mu: f64,
    pub iterations: usize,
    pub kkt_error: f64,
    pub energy: f64,
}

const KAPPA_SIGMA: f64 = 1e10;
const BOUND_RELAX: f64 = 1e-10;

/// Minimizes `obj` subject to `lower ≤ x ≤ upper` (infinite entries are
/// unbounded). Components whose bounds coincide are held fixed.
pub fn minimize<O: Objective>(
    obj: &O,
    solver: &SparseCholesky,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &IpmOptions,
) -> Result<IpmResult> {
    let n = x0.len();
    let pattern = obj.pattern();
    assert_eq!(pattern.n, n);
    let has_lo: Vec<bool> = lower.iter().map(|v| v.is_finite()).collect();
    let has_up: Vec<bool> = upper.iter().map(|v| v.is_finite()).collect();
    let frozen: Vec<bool> = (0..n).map(|i| has_lo[i] && has_up[i] && upper[i] - lower[i] < 1e-12).collect();
    let any_frozen = frozen.iter().any(|&f| f);

    // Slightly relaxed bounds keep slacks representable next to an active bound.
    let (orig_lower, orig_upper) = (lower, upper);
    let relax = |b: f64| BOUND_RELAX * b.abs().max(1.0);
    let lower: Vec<f64> = (0..n).map(|i| if frozen[i] { lower[i] } else { lower[i] - relax(lower[i]) }).collect();
    let upper: Vec<f64> = (0..n).map(|i| if frozen[i] { upper[i] } else { upper[i] + relax(upper[i]) }).collect();
    let (lower, upper) = (&lower[..], &upper[..]);
    let finish = |mut x: Vec<f64>| {
        for i in 0..n {
            x[i] = x[i].clamp(orig_lower[i], orig_upper[i]);
        }
        x
    };

    let mut x = x0.to_vec();
    for i in 0..n {
        if frozen[i] {
            x[i] = lower[i];
            continue;
        }
        let (lo, up) = (lower[i], upper[i]);
        let width = if has_lo[i] && has_up[i] { up - lo } else { f64::INFINITY };
        let push = |b: f64| (opts.bound_push * b.abs().max(1.0)).min(opts.bound_push * width);
        if has_lo[i] {
            x[i] = x[i].max(lo + push(lo));
        }
        if has_up[i] {
            x[i] = x[i].min(up - push(up));
        }
    }
    let mut mu = opts.mu_init;
    let slack_lo = |x: &[f64], i: usize| x[i] - lower[i];
    let slack_up = |x: &[f64], i: usize| upper[i] - x[i];
    let mut zl: Vec<f64> = (0..n).map(|i| if has_lo[i] && !frozen[i] { mu / slack_lo(&x, i) } else { 0.0 }).collect();
    let mut zu: Vec<f64> = (0..n).map(|i| if has_up[i] && !frozen[i] { mu / slack_up(&x, i) } else { 0.0 }).collect();

    let mu_min = opts.tol / 10.0;
    let mut delta_last = 0.0f64;
    let (mut energy, mut grad) = obj.energy_and_gradient(&x);
    let mut iterations = 0;
    loop {
        // Optimality measures.
        let kkt = |grad: &[f64], zl: &[f64], zu: &[f64], x: &[f64], mu: f64| {
            let mut dual = 0.0f64;
            let mut compl = 0.0f64;
            for i in 0..n {
                if frozen[i] {
                    continue;
                }
                dual = dual.max((grad[i] - zl[i] + zu[i]).abs());
                if has_lo[i] {
                    compl = compl.max((slack_lo(x, i) * zl[i] - mu).abs());
                }
                if has_up[i] {
                    compl = compl.max((slack_up(x, i) * zu[i] - mu).abs());
                }
            }
            dual.max(compl)
        };
        let err0 = kkt(&grad, &zl, &zu, &x, 0.0);
        if err0 <= opts.tol {
            return Ok(IpmResult { x: finish(x), z_lower: zl, z_upper: zu, mu, iterations, kkt_error: err0, energy });
        }
        if iterations >= opts.max_iter {
            if err0 <= opts.acceptable_tol {
                return Ok(IpmResult { x: finish(x), z_lower: zl, z_upper: zu, mu, iterations, kkt_error: err0, energy });
            }
            return Err(Error::NotConverged { iterations, error: err0 });
        }
        while mu > mu_min && kkt(&grad, &zl, &zu, &x, mu) <= 10.0 * mu {
            mu = mu_min.max((0.2 * mu).min(mu.powf(1.5)));
        }
        iterations += 1;

        // Barrier gradient and primal-dual diagonal.
        let mut rhs = vec![0.0; n];
        let mut sigma = vec![0.0; n];
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let mut g = grad[i];
            if has_lo[i] {
                let s = slack_lo(&x, i);
                g -= mu / s;
                sigma[i] += zl[i] / s;
            }
            if has_up[i] {
                let s = slack_up(&x, i);
                g += mu / s;
                sigma[i] += zu[i] / s;
            }
            rhs[i] = -g;
        }
        let mut hv = obj.hessian(&x);
        if let Some(k) = hv.iter().position(|v| !v.is_finite()) {
            return Err(Error::LinearSolve(format!("non-finite Hessian entry at position {k}")));
        }
        if let Some(i) = grad.iter().position(|v| !v.is_finite()) {
            return Err(Error::LinearSolve(format!("non-finite gradient at unknown {i}")));
        }
        if any_frozen {
            for c in 0..n {
                for k in pattern.col_ptr[c]..pattern.col_ptr[c + 1] {
                    let r = pattern.row_idx[k];
                    if frozen[r] || frozen[c] {
                        hv[k] = if r == c { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        for i in 0..n {
            hv[pattern.diag[i]] += sigma[i];
        }

        // Inertia correction: smallest diagonal shift that makes the system positive definite.
        let mut delta = 0.0;
        let mut shifted = hv.clone();
        let factor = loop {
            if delta > 0.0 {
                shifted.copy_from_slice(&hv);
                for i in 0..n {
                    if !frozen[i] {
                        shifted[pattern.diag[i]] += delta;
                    }
                }
            }
            match solver.factor(if delta > 0.0 { &shifted } else { &hv }) {
                Some(f) => break f,
                None => {
                    delta = if delta == 0.0 {
                        if delta_last == 0.0 { 1e-4 } else { (delta_last / 3.0).max(1e-20) }
                    } else if delta_last == 0.0 {
                        100.0 * delta
                    } else {
                        8.0 * delta
                    };
                    if delta > 1e40 {
                        return Err(Error::LinearSolve("inertia correction failed".into()));
                    }
                }
            }
        };
        if delta > 0.0 {
            delta_last = delta;
        }
        let dx = factor.solve(&rhs);

        // Fraction to the boundary.
        let tau = opts.tau_min.max(1.0 - mu);
        let mut amax: f64 = 1.0;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            if has_lo[i] && dx[i] < 0.0 {
                amax = amax.min(-tau * slack_lo(&x, i) / dx[i]);
            }
            if has_up[i] && dx[i] > 0.0 {
                amax = amax.min(tau * slack_up(&x, i) / dx[i]);
            }
        }
        // Dual step directions.
        let mut dzl = vec![0.0; n];
        let mut dzu = vec![0.0; n];
        let mut zmax: f64 = 1.0;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            if has_lo[i] {
                let s = slack_lo(&x, i);
                dzl[i] = mu / s - zl[i] - zl[i] / s * dx[i];
                if dzl[i] < 0.0 {
                    zmax = zmax.min(-tau * zl[i] / dzl[i]);
                }
            }
            if has_up[i] {
                let s = slack_up(&x, i);
                dzu[i] = mu / s - zu[i] + zu[i] / s * dx[i];
                if dzu[i] < 0.0 {
                    zmax = zmax.min(-tau * zu[i] / dzu[i]);
                }
            }
        }

        // Armijo backtracking on the barrier merit.
        let barrier = |x: &[f64], e: f64| {
            let mut b = e;
            for i in 0..n {
                if frozen[i] {
                    continue;
                }
                if has_lo[i] {
                    b -= mu * slack_lo(x, i).ln();
                }
                if has_up[i] {
                    b -= mu * slack_up(x, i).ln();
                }
            }
            b
        };
        let phi0 = barrier(&x, energy);
        let slope: f64 = -rhs.iter().zip(&dx).map(|(r, d)| r * d).sum::<f64>();
        let mut step = amax;
        let mut xt = vec![0.0; n];
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                xt[i] = x[i] + step * dx[i];
            }
            let et = obj.energy(&xt);
            let phit = barrier(&xt, et);
            let decrease_ok = phit <= phi0 + 1e-4 * step * slope;
            // Tiny steps where the merit is flat to round-off are accepted.
            let flat = (phit - phi0).abs() <= 1e-15 * phi0.abs().max(1.0) * 10.0;
            if phit.is_finite() && (decrease_ok || flat) {
                accepted = Some(());
                break;
            }
            step *= 0.5;
        }
        if accepted.is_none() {
            return Err(Error::NotConverged { iterations, error: err0 });
        }
        x.copy_from_slice(&xt);
        let az = zmax.min(1.0);
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            if has_lo[i] {
                let s = slack_lo(&x, i);
                zl[i] = (zl[i] + az * dzl[i]).clamp(mu / (KAPPA_SIGMA * s), KAPPA_SIGMA * mu / s);
            }
            if has_up[i] {
                let s = slack_up(&x, i);
                zu[i] = (zu[i] + az * dzu[i]).clamp(mu / (KAPPA_SIGMA * s), KAPPA_SIGMA * mu / s);
            }
        }
        let eg = obj.energy_and_gradient(&x);
        energy = eg.0;
        grad = eg.1;
    }
}
