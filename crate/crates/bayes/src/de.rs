//! Differential evolution (rand/1/bin) with feasibility repair, used to
//! maximize the batch acquisition.

use crate::error::{BayesError, Result};
use crate::surrogate::{acquisition, BaseSamples, Bounds, Surrogate};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeConfig {
    /// Population size is `population_factor · q² · d`.
    pub population_factor: usize,
    pub differential_weight: f64,
    pub crossover: f64,
    pub max_generations: usize,
    /// Stop after this many generations without improvement of the best value.
    pub stagnation_generations: usize,
    /// Rejection-sampling budget per required feasible seed.
    pub draws_per_seed: usize,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population_factor: 15,
            differential_weight: 0.7,
            crossover: 0.9,
            max_generations: 200,
            stagnation_generations: 20,
            draws_per_seed: 1000,
        }
    }
}

pub type Feasibility<'a> = dyn Fn(&[f64]) -> bool + Sync + 'a;

/// `n` uniform samples of `bounds` satisfying `feasible`.
pub fn feasible_uniform<R: Rng>(bounds: &Bounds, n: usize, feasible: &Feasibility<'_>, draws_per_seed: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let max_draws = n.saturating_mul(draws_per_seed).max(n);
    let mut out = Vec::with_capacity(n);
    let mut tried = 0;
    while out.len() < n {
        if tried >= max_draws {
            return Err(BayesError::InsufficientFeasible {
                required: n,
                found: out.len(),
                tried,
                fraction: out.len() as f64 / tried.max(1) as f64,
            });
        }
        tried += 1;
        let x = bounds.sample(rng);
        if feasible(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Maximizes `objective` over the box from a given initial population.
/// `repair` maps a trial onto a feasible vector given its parent.
pub fn maximize<R: Rng>(
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
    population: Vec<Vec<f64>>,
    lower: &[f64],
    upper: &[f64],
    repair: &(dyn Fn(&mut Vec<f64>, &[f64]) + Sync),
    cfg: &DeConfig,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let np = population.len();
    assert!(np >= 1);
    let dim = lower.len();
    let mut pop = population;
    let mut fit: Vec<f64> = pop.par_iter().map(|x| objective(x)).collect();
    let best_of = |fit: &[f64]| (0..fit.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b });
    let mut best = best_of(&fit);
    if np < 4 {
        return (pop[best].clone(), fit[best]);
    }
    let mut stagnant = 0;
    for _ in 0..cfg.max_generations {
        let mut trials = Vec::with_capacity(np);
        for (i, parent) in pop.iter().enumerate() {
            let r = loop {
                let idx = sample(rng, np, 3);
                let r = [idx.index(0), idx.index(1), idx.index(2)];
                if !r.contains(&i) {
                    break r;
                }
            };
            let jrand = rng.random_range(0..dim);
            let mut trial = parent.clone();
            for k in 0..dim {
                if k == jrand || rng.random::<f64>() < cfg.crossover {
                    let mut v = pop[r[0]][k] + cfg.differential_weight * (pop[r[1]][k] - pop[r[2]][k]);
                    if v < lower[k] {
                        v = 0.5 * (parent[k] + lower[k]);
                    } else if v > upper[k] {
                        v = 0.5 * (parent[k] + upper[k]);
                    }
                    trial[k] = v;
                }
            }
            repair(&mut trial, parent);
            trials.push(trial);
        }
        let tfit: Vec<f64> = trials.par_iter().map(|x| objective(x)).collect();
        let previous = fit[best];
        for (i, (t, f)) in trials.into_iter().zip(tfit).enumerate() {
            if f >= fit[i] {
                pop[i] = t;
                fit[i] = f;
            }
        }
        best = best_of(&fit);
        if fit[best] > previous + 1e-12 * previous.abs().max(1.0) {
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= cfg.stagnation_generations {
                break;
            }
        }
    }
    (pop[best].clone(), fit[best])
}

/// Batch of `q` feasible designs maximizing the composite batch UCB inside `bounds`.
#[allow(clippy::too_many_arguments)]
pub fn propose_batch<R: Rng>(
    surrogate: &Surrogate,
    bounds: &Bounds,
    feasible: &Feasibility<'_>,
    q: usize,
    beta: f64,
    base: &BaseSamples,
    cfg: &DeConfig,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let d = bounds.dim();
    let np = (cfg.population_factor * q * q * d).max(4);
    let seeds = feasible_uniform(bounds, np * q, feasible, cfg.draws_per_seed, rng)?;
    let population: Vec<Vec<f64>> = seeds.chunks(q).map(|c| c.concat()).collect();
    let lower: Vec<f64> = (0..q).flat_map(|_| bounds.lower.iter().copied()).collect();
    let upper: Vec<f64> = (0..q).flat_map(|_| bounds.upper.iter().copied()).collect();
    let objective = |v: &[f64]| {
        let batch: Vec<Vec<f64>> = v.chunks(d).map(|c| c.to_vec()).collect();
        acquisition(surrogate, &batch, beta, base)
    };
    // Infeasible points of a trial fall back to the parent's point.
    let repair = |trial: &mut Vec<f64>, parent: &[f64]| {
        for j in 0..q {
            if !feasible(&trial[j * d..(j + 1) * d]) {
                trial[j * d..(j + 1) * d].copy_from_slice(&parent[j * d..(j + 1) * d]);
            }
        }
    };
    let (best, value) = maximize(&objective, population, &lower, &upper, &repair, cfg, rng);
    log::debug!("batch acquisition {value:.6}");
    Ok(best.chunks(d).map(|c| c.to_vec()).collect())
}
