//! Quasi-static surfing time stepping with adaptive refinement, presolve and
//! backtracking.

use super::{phase_field_bounds, presolve_displacement, solve_coupled, IpmOptions, SparseCholesky};
use crate::assembly::{crack_length, surfing_bcs, Discretization, FractureState, Notch, SurfingParams, System};
use crate::error::{Error, Result};
use crate::geometry::{build_layout, DesignVector, Domain, InclusionLayout};
use crate::mesh::{execute_adaptation, find_crack_tip, mark_coarsen, mark_refine, AdaptiveMesh, CellKey, MarkParams};
use crate::model::MaterialParams;
use crate::postproc::{j_integral, JSample, JTrace};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControls {
    pub dt: f64,
    pub max_crack_advance: f64,
    pub target_crack_length: f64,
    /// Final pseudo-time; defaults to the time the load center needs to cross the domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    pub irreversibility_threshold: f64,
    /// Bisection solves allowed per step while backtracking.
    pub max_backtracks: usize,
    /// Backtracking stops once the load bracket is narrower than `dt / 2^depth`.
    pub backtrack_depth: usize,
    pub max_dt_halvings: usize,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            dt: 0.01,
            max_crack_advance: 2.0,
            target_crack_length: 80.0,
            final_time: None,
            irreversibility_threshold: 0.5,
            max_backtracks: 40,
            backtrack_depth: 8,
            max_dt_halvings: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub domain: Domain,
    pub material: MaterialParams,
    pub k_i: f64,
    pub velocity: f64,
    /// Finest cell size.
    pub h_min: f64,
    pub notch: Notch,
    pub controls: StepControls,
    pub marking: MarkParams,
    pub ipm: IpmOptions,
    pub residual_stiffness: f64,
    /// Inclusions reaching closer than this to the outer boundary are dropped.
    pub boundary_strip: f64,
    /// Center the surfing field vertically on the previous crack tip instead
    /// of the notch line. The branch cut of the K-field then leaves the crack
    /// faces on the left boundary and imposes a jump in intact material.
    pub track_tip_y: bool,
    /// Scale the fracture energy by `1/(1 + h_min/(πε))` to cancel the
    /// toughness amplification of the discretized crack band.
    pub discretization_correction: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let material = MaterialParams::default();
        Self {
            domain: Domain::default(),
            h_min: 0.4 * material.eps,
            marking: MarkParams::for_eps(material.eps),
            material,
            k_i: 1.1,
            velocity: 50.0,
            notch: Notch::default(),
            controls: StepControls::default(),
            ipm: IpmOptions::default(),
            residual_stiffness: 1e-6,
            boundary_strip: 1.0,
            track_tip_y: false,
            discretization_correction: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.material.validate().map_err(Error::InvalidInput)?;
        let c = &self.controls;
        if !(c.dt > 0.0 && c.max_crack_advance > 0.0 && c.target_crack_length > 0.0) {
            return Err(Error::InvalidInput("dt, max_crack_advance and target_crack_length must be positive".into()));
        }
        if !(self.h_min > 0.0 && self.k_i > 0.0 && self.velocity > 0.0) {
            return Err(Error::InvalidInput("h_min, k_i and velocity must be positive".into()));
        }
        if !(self.domain.lx > self.notch.length && self.domain.ly > 0.0) {
            return Err(Error::InvalidInput("domain must be larger than the notch".into()));
        }
        Ok(())
    }

    /// Material actually used in the discrete energy.
    pub fn numerical_material(&self) -> MaterialParams {
        let mut m = self.material;
        if self.discretization_correction {
            m.gc /= 1.0 + self.h_min / (std::f64::consts::PI * m.eps);
        }
        m
    }

    pub fn final_time(&self) -> f64 {
        self.controls.final_time.unwrap_or(self.domain.lx / self.velocity)
    }

    /// Inclusion layout of a design for one crack offset, without inclusions
    /// touching the boundary strip.
    pub fn layout(&self, x: &DesignVector, w: f64) -> InclusionLayout {
        build_layout(x, w, &self.domain).restricted_to(&self.domain, self.boundary_strip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TargetCrackLength,
    FinalTime,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub trace: JTrace,
    pub step_wall_times: Vec<f64>,
    pub termination: Termination,
    pub backtracks: usize,
    /// Accepted steps whose advance exceeded the cap because no admissible
    /// load level existed inside the bracket.
    pub unresolved_advances: usize,
    pub dt_halvings: usize,
    /// Largest decrease of a history-bounded phase-field value over any accepted step.
    pub max_irreversibility_violation: f64,
    pub alpha_range: (f64, f64),
    pub n_cells: usize,
    pub n_vertices: usize,
    pub final_mesh: AdaptiveMesh,
    pub final_state: FractureState,
}

/// Read-only view handed to observers after every accepted step.
pub struct StepView<'a> {
    pub sample: &'a JSample,
    pub mesh: &'a AdaptiveMesh,
    pub state: &'a FractureState,
}

pub fn run_surfing_simulation(layout: &InclusionLayout, config: &SimulationConfig) -> Result<SimulationResult> {
    run_surfing_simulation_with(layout, config, |_| {})
}

struct Fields {
    state: FractureState,
    history: Vec<f64>,
}

fn notch_alpha(mesh: &AdaptiveMesh, notch: &Notch) -> Vec<f64> {
    mesh.vertex_positions().iter().map(|p| if notch.contains(*p, mesh.h_min()) { 1.0 } else { 0.0 }).collect()
}

/// Refines around the notch and resolves interfaces before the first step.
fn initial_mesh(config: &SimulationConfig, layout: &InclusionLayout) -> Result<AdaptiveMesh> {
    let mut mesh = AdaptiveMesh::for_domain(&config.domain, config.h_min, config.material.eps)?;
    let everywhere = [f64::NEG_INFINITY, config.notch.y];
    loop {
        let alpha = notch_alpha(&mesh, &config.notch);
        let marks = mark_refine(&mesh, &alpha, everywhere, &config.marking);
        if marks.is_empty() || mesh.refine(&marks) == 0 {
            break;
        }
    }
    loop {
        let d = Discretization::new(&mesh, layout);
        if d.ambiguous.is_empty() || mesh.refine(&d.ambiguous) == 0 {
            break;
        }
    }
    Ok(mesh)
}

fn adapt(
    mesh: &AdaptiveMesh,
    fields: &Fields,
    refine: &[CellKey],
    coarsen: &[CellKey],
) -> Result<Option<(AdaptiveMesh, Fields)>> {
    let a = execute_adaptation(
        mesh,
        refine,
        coarsen,
        &[(&fields.state.u, 2), (&fields.state.b, 2), (&fields.state.alpha, 1), (&fields.history, 1)],
    )?;
    if !a.changed {
        return Ok(None);
    }
    let mut it = a.fields.into_iter();
    let (u, b, alpha, history) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let state = FractureState { u, b, alpha, step: fields.state.step, generation: a.mesh.generation() };
    Ok(Some((a.mesh, Fields { state, history })))
}

/// Runs the surfing simulation, calling `observer` after every accepted step.
pub fn run_surfing_simulation_with<F: FnMut(&StepView<'_>)>(
    layout: &InclusionLayout,
    config: &SimulationConfig,
    mut observer: F,
) -> Result<SimulationResult> {
    config.validate()?;
    let ctl = &config.controls;
    let surf = SurfingParams::new(config.k_i, config.velocity, &config.material);
    let notch = config.notch;
    let material = config.numerical_material();
    let mut mesh = initial_mesh(config, layout)?;
    let mut fields = {
        let mut state = FractureState::zeros(&mesh);
        state.alpha = notch_alpha(&mesh, &notch);
        Fields { history: state.alpha.clone(), state }
    };
    let bc_at = |mesh: &AdaptiveMesh, t: f64, tip_y: f64| surfing_bcs(mesh, t, tip_y, &surf, Some(&notch));

    let t_final = config.final_time();
    let mut tip_prev = notch.tip();
    let tip_y = |tip_prev: [f64; 2]| if config.track_tip_y { tip_prev[1] } else { notch.y };
    let mut system = System::new(mesh.clone(), layout, &bc_at(&mesh, 0.0, tip_y(tip_prev)), material, config.residual_stiffness);
    let mut solver = SparseCholesky::new(&system.pattern)?;

    let mut trace = JTrace::default();
    let mut wall = Vec::new();
    let mut t = 0.0;
    let mut t_base: Option<f64> = None;
    let mut dt_cur = ctl.dt;
    let mut halvings_now = 0;
    let mut total_halvings = 0;
    let mut backtracks = 0;
    let mut unresolved = 0;
    let mut coarsen_flag = true;
    let mut max_violation = 0.0f64;
    let mut alpha_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut crack_len = crack_length(&mesh, &fields.state.alpha, config.material.eps);
    let mut step = 0usize;
    let mut clock = Instant::now();

    let termination = loop {
        if crack_len >= ctl.target_crack_length {
            break Termination::TargetCrackLength;
        }
        if t > t_final + 1e-12 {
            break Termination::FinalTime;
        }
        let backup = fields.state.clone();
        let attempt = (|| -> Result<(FractureState, [f64; 2], f64, Vec<f64>)> {
            if system.update_bc(&bc_at(&mesh, t, tip_y(tip_prev))) {
                solver = SparseCholesky::new(&system.pattern)?;
            }
            let x = system.free_from_state(&fields.state)?;
            let x = presolve_displacement(&system, &solver, &x)?;
            let (lo, hi) = phase_field_bounds(&system, &fields.history, ctl.irreversibility_threshold);
            let res = solve_coupled(&system, &solver, &x, &lo, &hi, &config.ipm)?;
            let state = system.state_from_free(&res.x, step);
            let tip = find_crack_tip(&mesh, &state.alpha, config.marking.alpha_tip, notch.tip());
            Ok((state, tip, res.energy, res.x))
        })();
        let (mut state, mut tip, mut energy, mut x) = match attempt {
            Ok(v) => v,
            Err(e) => {
                fields.state = backup;
                halvings_now += 1;
                total_halvings += 1;
                let Some(tb) = t_base.filter(|_| halvings_now <= ctl.max_dt_halvings) else {
                    return Err(Error::Simulation { t, reason: e.to_string() });
                };
                log::warn!("solve failed at t = {t}: {e}; halving the time step");
                dt_cur *= 0.5;
                t = tb + dt_cur;
                continue;
            }
        };

        // Backtracking: rewind the load inside (t_acc, t] by bisection until the
        // tip advance is acceptable, warm-starting from the current solution.
        if tip[0] - tip_prev[0] > ctl.max_crack_advance {
            let lo = t_base.unwrap_or(t);
            let mut hi = t;
            let mut nb = 0;
            loop {
                if hi - lo <= ctl.dt * 0.5f64.powi(ctl.backtrack_depth as i32) || nb >= ctl.max_backtracks {
                    unresolved += 1;
                    log::warn!(
                        "unstable crack advance of {:.3} at t = {hi:.5} cannot be resolved by backtracking",
                        tip[0] - tip_prev[0]
                    );
                    t = hi;
                    break;
                }
                nb += 1;
                backtracks += 1;
                let mid = 0.5 * (lo + hi);
                system.update_bc(&bc_at(&mesh, mid, tip_y(tip_prev)));
                let (lb, ub) = phase_field_bounds(&system, &fields.history, ctl.irreversibility_threshold);
                let x0 = system.free_from_state(&state)?;
                let res = solve_coupled(&system, &solver, &x0, &lb, &ub, &config.ipm)
                    .map_err(|e| Error::Simulation { t: mid, reason: format!("backtracking solve failed: {e}") })?;
                state = system.state_from_free(&res.x, step);
                tip = find_crack_tip(&mesh, &state.alpha, config.marking.alpha_tip, notch.tip());
                energy = res.energy;
                x = res.x;
                log::debug!("backtracked to t = {mid:.5}, tip x = {:.3}", tip[0]);
                if tip[0] - tip_prev[0] > ctl.max_crack_advance {
                    hi = mid;
                } else {
                    t = mid;
                    break;
                }
            }
            // The boundary data must match the accepted time.
            system.update_bc(&bc_at(&mesh, t, tip_y(tip_prev)));
        }
        fields.state = state;

        // Adaptation.
        let mut coarsen = Vec::new();
        if coarsen_flag {
            coarsen = mark_coarsen(&mesh, &fields.state.alpha, tip, &config.marking);
            coarsen_flag = false;
        }
        let mut changed = false;
        loop {
            let refine = mark_refine(&mesh, &fields.state.alpha, tip, &config.marking);
            if refine.is_empty() && coarsen.is_empty() {
                break;
            }
            match adapt(&mesh, &fields, &refine, &coarsen)? {
                Some((m, f)) => {
                    mesh = m;
                    fields = f;
                    changed = true;
                }
                None => break,
            }
            coarsen.clear();
        }
        if changed {
            loop {
                let d = Discretization::new(&mesh, layout);
                if d.ambiguous.is_empty() {
                    break;
                }
                match adapt(&mesh, &fields, &d.ambiguous, &[])? {
                    Some((m, f)) => {
                        mesh = m;
                        fields = f;
                    }
                    None => break,
                }
            }
            system = System::new(mesh.clone(), layout, &bc_at(&mesh, t, tip_y(tip_prev)), material, config.residual_stiffness);
            solver = SparseCholesky::new(&system.pattern)?;
            continue;
        }

        // Accept the step.
        for (v, &prev) in fields.history.iter().enumerate() {
            let cur = fields.state.alpha[v];
            if prev >= ctl.irreversibility_threshold {
                max_violation = max_violation.max(prev - cur);
            }
            alpha_range = (alpha_range.0.min(cur), alpha_range.1.max(cur));
        }
        let full = system.dofs.expand(&x);
        crack_len = crack_length(&mesh, &fields.state.alpha, config.material.eps);
        let sample = JSample {
            step,
            t,
            tip,
            crack_length: crack_len,
            j: j_integral(&system, &full),
            energy,
            n_dofs: system.n_free(),
        };
        log::info!(
            "step {step} t = {t:.4} tip = ({:.3}, {:.3}) length = {crack_len:.3} J = {:.4} dofs = {}",
            tip[0],
            tip[1],
            sample.j,
            sample.n_dofs
        );
        fields.state.step = step;
        observer(&StepView { sample: &sample, mesh: &mesh, state: &fields.state });
        trace.samples.push(sample);
        wall.push(clock.elapsed().as_secs_f64());
        clock = Instant::now();
        fields.history = fields.state.alpha.clone();
        tip_prev = tip;
        coarsen_flag = true;
        t_base = Some(t);
        halvings_now = 0;
        dt_cur = ctl.dt;
        t += dt_cur;
        step += 1;
    };
    Ok(SimulationResult {
        trace,
        step_wall_times: wall,
        termination,
        backtracks,
        unresolved_advances: unresolved,
        dt_halvings: total_halvings,
        max_irreversibility_violation: max_violation,
        alpha_range,
        n_cells: mesh.n_cells(),
        n_vertices: mesh.n_vertices(),
        final_mesh: mesh,
        final_state: fields.state,
    })
}
