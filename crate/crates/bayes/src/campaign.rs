//! The outer optimization loop: feasible random initialization, then
//! fit, propose, evaluate and trust-region update per iteration.
//!
//! Every iteration draws from its own ChaCha stream derived from the seed,
//! so a campaign resumed from a checkpoint reproduces the uninterrupted run.

use crate::de::{feasible_uniform, propose_batch, DeConfig, Feasibility};
use crate::error::{BayesError, Result};
use crate::gp::GpConfig;
use crate::surrogate::{BaseSamples, Bounds, Surrogate};
use crate::trust_region::{TrustRegion, TrustRegionConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Maps a design and a scenario index to a scalar objective value.
pub trait Evaluator: Sync {
    fn n_scenarios(&self) -> usize;
    fn evaluate(&self, x: &[f64], scenario: usize) -> std::result::Result<f64, String>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub n_init: usize,
    pub q: usize,
    /// Number of batch iterations after initialization.
    pub iterations: usize,
    pub beta: f64,
    pub n_mc: usize,
    pub seed: u64,
    pub de: DeConfig,
    pub trust_region: TrustRegionConfig,
    pub gp: GpConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            n_init: 20,
            q: 5,
            iterations: 10,
            beta: 4.0,
            n_mc: 256,
            seed: 0,
            de: DeConfig::default(),
            trust_region: TrustRegionConfig::default(),
            gp: GpConfig::default(),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init < 2 {
            return Err(BayesError::InvalidInput("n_init must be at least 2".into()));
        }
        if self.q == 0 || self.n_mc == 0 {
            return Err(BayesError::InvalidInput("q and n_mc must be positive".into()));
        }
        if !(self.beta >= 0.0) {
            return Err(BayesError::InvalidInput("beta must be non-negative".into()));
        }
        Ok(())
    }
}

/// One evaluated design with its per-scenario outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub x: Vec<f64>,
    /// `Ok(value)` or the failure message, per scenario.
    pub outcomes: Vec<std::result::Result<f64, String>>,
    /// Worst case over the scenarios; `None` if any scenario failed.
    pub objective: Option<f64>,
    /// 0 for the initial designs.
    pub iteration: usize,
}

impl Evaluation {
    fn new(x: Vec<f64>, outcomes: Vec<std::result::Result<f64, String>>, iteration: usize) -> Self {
        let objective = outcomes
            .iter()
            .try_fold(f64::INFINITY, |m, o| o.as_ref().ok().map(|v| m.min(*v)));
        Self { x, outcomes, objective, iteration }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    /// Scenario evaluations performed so far.
    pub n_evaluations: usize,
    pub best_objective: Option<f64>,
    pub success: bool,
    /// Bounds the batch was proposed in.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub config: CampaignConfig,
    pub global_lower: Vec<f64>,
    pub global_upper: Vec<f64>,
    pub evaluations: Vec<Evaluation>,
    pub iterations: Vec<IterationLog>,
    pub trust_region: TrustRegion,
    /// Index of the incumbent in `evaluations`.
    pub best: Option<usize>,
}

impl CampaignRecord {
    pub fn new(config: CampaignConfig, global: &Bounds) -> Self {
        Self {
            config,
            global_lower: global.lower.clone(),
            global_upper: global.upper.clone(),
            evaluations: Vec::new(),
            iterations: Vec::new(),
            trust_region: TrustRegion::global(global),
            best: None,
        }
    }

    pub fn global(&self) -> Bounds {
        Bounds::new(self.global_lower.clone(), self.global_upper.clone())
    }

    pub fn best_evaluation(&self) -> Option<&Evaluation> {
        self.best.map(|i| &self.evaluations[i])
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.best_evaluation().and_then(|e| e.objective)
    }

    /// Number of completed iterations, counting initialization as one.
    pub fn completed(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_finished(&self) -> bool {
        self.completed() > self.config.iterations
    }

    pub fn n_scenario_evaluations(&self) -> usize {
        self.evaluations.iter().map(|e| e.outcomes.len()).sum()
    }

    /// `(scenario evaluations, best-so-far objective)` after each iteration.
    pub fn convergence(&self) -> Vec<(usize, Option<f64>)> {
        self.iterations.iter().map(|l| (l.n_evaluations, l.best_objective)).collect()
    }

    /// Incumbent by the first maximal objective among complete evaluations.
    fn recompute_best(&mut self) {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.evaluations.iter().enumerate() {
            if let Some(f) = e.objective {
                if best.is_none_or(|(_, b)| f > b) {
                    best = Some((i, f));
                }
            }
        }
        self.best = best.map(|(i, _)| i);
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| BayesError::Checkpoint(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).map_err(|e| BayesError::Checkpoint(format!("{}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, path).map_err(|e| BayesError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| BayesError::Checkpoint(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| BayesError::Checkpoint(e.to_string()))
    }
}

fn stream(seed: u64, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64);
    rng
}

fn evaluate_batch<E: Evaluator + ?Sized>(evaluator: &E, designs: Vec<Vec<f64>>, iteration: usize) -> Vec<Evaluation> {
    let ns = evaluator.n_scenarios();
    let jobs: Vec<(usize, usize)> = (0..designs.len()).flat_map(|i| (0..ns).map(move |s| (i, s))).collect();
    let results: Vec<std::result::Result<f64, String>> = jobs
        .par_iter()
        .map(|&(i, s)| match evaluator.evaluate(&designs[i], s) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(format!("non-finite value {v}")),
            Err(e) => Err(e),
        })
        .collect();
    let mut it = results.into_iter();
    designs
        .into_iter()
        .map(|x| {
            let outcomes: Vec<_> = it.by_ref().take(ns).collect();
            for (s, o) in outcomes.iter().enumerate() {
                if let Err(e) = o {
                    log::warn!("evaluation of scenario {s} failed at {x:?}: {e}");
                }
            }
            Evaluation::new(x, outcomes, iteration)
        })
        .collect()
}

/// Runs one iteration (initialization first) and appends it to the record.
pub fn step<E: Evaluator + ?Sized>(record: &mut CampaignRecord, evaluator: &E, feasible: &Feasibility<'_>) -> Result<()> {
    let cfg = record.config;
    cfg.validate()?;
    let iteration = record.completed();
    let mut rng = stream(cfg.seed, iteration);
    let global = record.global();
    let region = record.trust_region.bounds();
    let designs = if iteration == 0 {
        feasible_uniform(&global, cfg.n_init, feasible, cfg.de.draws_per_seed, &mut rng)?
    } else {
        let complete: Vec<&Evaluation> = record.evaluations.iter().filter(|e| e.objective.is_some()).collect();
        if complete.len() < 2 {
            return Err(BayesError::InvalidInput(format!(
                "only {} designs have complete scenario results; at least two are required",
                complete.len()
            )));
        }
        let x: Vec<Vec<f64>> = complete.iter().map(|e| e.x.clone()).collect();
        let y: Vec<Vec<f64>> = (0..evaluator.n_scenarios())
            .map(|s| complete.iter().map(|e| *e.outcomes[s].as_ref().unwrap()).collect())
            .collect();
        let surrogate = Surrogate::fit(&x, &y, &region, &cfg.gp, &mut rng)?;
        let base = BaseSamples::new(cfg.n_mc, surrogate.n_scenarios(), cfg.q, &mut rng);
        propose_batch(&surrogate, &region, feasible, cfg.q, cfg.beta, &base, &cfg.de, &mut rng)?
    };
    if let Some(bad) = designs.iter().find(|x| !feasible(x) || !global.contains(x)) {
        return Err(BayesError::Numerical(format!("proposed design {bad:?} violates the constraints")));
    }
    let previous = record.best_objective();
    record.evaluations.extend(evaluate_batch(evaluator, designs, iteration));
    record.recompute_best();
    let best = record.best_objective();
    let success = match (previous, best) {
        (Some(p), Some(b)) => b > p,
        (None, Some(_)) => true,
        _ => false,
    };
    if iteration > 0 {
        if let Some(center) = record.best_evaluation().map(|e| e.x.clone()) {
            record.trust_region.update(&center, success, &global, &cfg.trust_region);
        }
    }
    record.iterations.push(IterationLog {
        iteration,
        n_evaluations: record.n_scenario_evaluations(),
        best_objective: best,
        success,
        lower: region.lower,
        upper: region.upper,
    });
    log::info!("iteration {iteration}: best {best:?}, success {success}");
    Ok(())
}

/// Runs the remaining iterations, calling `checkpoint` after each one.
pub fn run_campaign<E: Evaluator + ?Sized>(
    record: &mut CampaignRecord,
    evaluator: &E,
    feasible: &Feasibility<'_>,
    mut checkpoint: impl FnMut(&CampaignRecord) -> Result<()>,
) -> Result<()> {
    while !record.is_finished() {
        step(record, evaluator, feasible)?;
        checkpoint(record)?;
    }
    Ok(())
}
