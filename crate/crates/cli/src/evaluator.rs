//! Maps designs to toughness values: the simulation pipeline or the analytic stub.

use crate::config::{EvaluatorKind, RunConfig};
use crate::output::write_trace;
use fracopt::geometry::design_clearance;
use fracopt::solver::{run_surfing_simulation_with, StepView};
use fracopt::{effective_toughness, DesignVector, InclusionLayout, SimulationResult};
use fracopt_bayes::{AnalyticStub, Bounds, Evaluator};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// Short stable identifier of a design from the bits of its parameters.
pub fn design_id(x: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in x {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Runs one surfing simulation of design `x` at crack offset `w`.
pub fn simulate_design<F: FnMut(&StepView<'_>)>(
    cfg: &RunConfig,
    x: &DesignVector,
    w: f64,
    observer: F,
) -> fracopt::Result<SimulationResult> {
    let layout = if cfg.inclusions { cfg.simulation.layout(x, w) } else { InclusionLayout::empty() };
    run_surfing_simulation_with(&layout, &cfg.simulation, observer)
}

pub struct SimulationEvaluator<'a> {
    cfg: &'a RunConfig,
    hash: String,
    /// Each run writes its trace to `<runs>/<design id>-w<scenario>/trace.csv`.
    runs: Option<PathBuf>,
}

impl<'a> SimulationEvaluator<'a> {
    pub fn new(cfg: &'a RunConfig, hash: &str, runs: Option<PathBuf>) -> Self {
        Self { cfg, hash: hash.to_string(), runs }
    }

    pub fn run_dir(&self, x: &[f64], scenario: usize) -> Option<PathBuf> {
        self.runs.as_ref().map(|r| r.join(format!("{}-w{scenario}", design_id(x))))
    }
}

impl Evaluator for SimulationEvaluator<'_> {
    fn n_scenarios(&self) -> usize {
        self.cfg.scenarios.len()
    }

    fn evaluate(&self, x: &[f64], scenario: usize) -> Result<f64, String> {
        let d = DesignVector::from_slice(x).ok_or_else(|| format!("expected {} parameters", DesignVector::DIM))?;
        let w = self.cfg.scenarios[scenario];
        let res = simulate_design(self.cfg, &d, w, |_| {}).map_err(|e| e.to_string())?;
        if let Some(dir) = self.run_dir(x, scenario) {
            if let Err(e) = write_trace(&dir.join("trace.csv"), &self.hash, &res.trace) {
                log::warn!("could not write the trace of {}: {e:#}", dir.display());
            }
        }
        let t = &self.cfg.toughness;
        effective_toughness(&res.trace, t.window, t.half_width).map(|r| r.g_eff).map_err(|e| e.to_string())
    }
}

/// Parameter space and feasibility of the configured problem.
pub struct Problem {
    pub kind: EvaluatorKind,
    pub names: Vec<String>,
    pub base: Vec<f64>,
    pub bounds: Bounds,
    pub z_min: f64,
    pub inclusions: bool,
}

impl Problem {
    pub fn new(cfg: &RunConfig) -> Self {
        let (names, base, bounds) = cfg.problem_space();
        Self { kind: cfg.evaluator, names, base, bounds, z_min: cfg.z_min, inclusions: cfg.inclusions }
    }

    pub fn clearance(&self, x: &[f64]) -> f64 {
        match self.kind {
            EvaluatorKind::Simulation => DesignVector::from_slice(x).map_or(f64::NAN, |d| design_clearance(&d)),
            EvaluatorKind::Stub => AnalyticStub::clearance(x),
        }
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        match self.kind {
            EvaluatorKind::Simulation => !self.inclusions || self.clearance(x) >= self.z_min,
            EvaluatorKind::Stub => AnalyticStub::is_feasible(x),
        }
    }

    /// Threshold the clearance is compared against.
    pub fn required_clearance(&self) -> f64 {
        match self.kind {
            EvaluatorKind::Simulation => self.z_min,
            EvaluatorKind::Stub => 0.0,
        }
    }
}
