//! Displacement presolve, bound-constrained coupled minimization and the
//! surfing time-stepping driver.

pub mod driver;
pub mod ipm;
pub mod linear;

pub use driver::{run_surfing_simulation, run_surfing_simulation_with, SimulationConfig, SimulationResult, StepControls, StepView, Termination};
pub use ipm::{minimize, IpmOptions, IpmResult, Objective};
pub use linear::SparseCholesky;

use crate::assembly::{DofKind, Pattern, System};
use crate::error::{Error, Result};

impl Objective for System {
    fn pattern(&self) -> &Pattern {
        &self.pattern
    }
    fn energy(&self, x: &[f64]) -> f64 {
        System::energy(self, x)
    }
    fn energy_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        System::energy_and_gradient(self, x)
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        System::hessian(self, x, false)
    }
}

/// Minimizes the energy over displacement unknowns at frozen phase field
/// (one symmetric positive-definite solve; the energy is quadratic there).
pub fn presolve_displacement(system: &System, solver: &SparseCholesky, x: &[f64]) -> Result<Vec<f64>> {
    let mut g = system.gradient(x);
    for (k, kind) in system.dofs.kinds().iter().enumerate() {
        if *kind == DofKind::PhaseField {
            g[k] = 0.0;
        }
    }
    let h = system.hessian(x, true);
    let factor = solver
        .factor(&h)
        .ok_or_else(|| Error::LinearSolve("displacement stiffness is singular (missing essential constraints?)".into()))?;
    let dx = factor.solve(&g);
    Ok(x.iter().zip(&dx).map(|(a, d)| a - d).collect())
}

/// Box bounds for the free unknowns: phase field in `[lo, 1]` where the
/// history lower bound is active above `threshold`, displacements free.
pub fn phase_field_bounds(system: &System, history: &[f64], threshold: f64) -> (Vec<f64>, Vec<f64>) {
    let n = system.n_free();
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    for k in 0..n {
        if system.dofs.kind(k) == DofKind::PhaseField {
            let prev = history[system.dofs.free_vertex(k)];
            lo[k] = if prev >= threshold { prev.min(1.0) } else { 0.0 };
            hi[k] = 1.0;
        }
    }
    (lo, hi)
}

/// Coupled minimization over displacement and phase field under box bounds.
pub fn solve_coupled(
    system: &System,
    solver: &SparseCholesky,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &IpmOptions,
) -> Result<IpmResult> {
    minimize(system, solver, x0, lower, upper, opts)
}
