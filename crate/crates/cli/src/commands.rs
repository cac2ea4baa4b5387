//! The `simulate`, `sweep`, `optimize` and `report` commands.

use crate::config::{EvaluatorKind, RunConfig};
use crate::evaluator::{design_id, simulate_design, Problem, SimulationEvaluator};
use crate::output::{csv_writer, read_trace, write_json, write_toughness, write_trace, ToughnessRow};
use anyhow::{bail, Context, Result};
use fracopt::geometry::design_clearance;
use fracopt::mesh::vtk::{write_vtk, PointField};
use fracopt::effective_toughness;
use fracopt_bayes::{run_campaign, AnalyticStub, BayesError, CampaignRecord, Evaluator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    SimulationFailed,
    Infeasible,
    WindowNotReached,
    ConfigMismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::SimulationFailed => 2,
            Status::Infeasible => 3,
            Status::WindowNotReached => 4,
            Status::ConfigMismatch => 5,
        }
    }
}

/// Result of a command: a status plus machine-readable details.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub detail: Value,
}

impl Outcome {
    fn new(status: Status, detail: Value) -> Self {
        Self { status, detail }
    }

    /// One JSON object with the status merged into the details.
    pub fn to_json(&self) -> Value {
        let mut v = match &self.detail {
            Value::Object(m) => Value::Object(m.clone()),
            other => json!({ "detail": other }),
        };
        v["status"] = serde_json::to_value(self.status).unwrap();
        v
    }
}

fn named(names: &[String], x: &[f64]) -> Value {
    Value::Object(names.iter().zip(x).map(|(n, v)| (n.clone(), json!(v))).collect())
}

pub fn simulate(cfg: &RunConfig, hash: &str, dump_fields: bool) -> Result<Outcome> {
    let x = cfg.design;
    let id = design_id(&x.to_array());
    if cfg.inclusions {
        let c = design_clearance(&x);
        if c < cfg.z_min {
            return Ok(Outcome::new(
                Status::Infeasible,
                json!({ "reason": "inclusion clearance below z_min", "clearance": c, "z_min": cfg.z_min }),
            ));
        }
    }
    let out = &cfg.out;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let fields_dir = out.join("fields");
    if dump_fields {
        std::fs::create_dir_all(&fields_dir)?;
    }
    let mut dump_error: Option<std::io::Error> = None;
    let started = Instant::now();
    let res = simulate_design(cfg, &x, cfg.w, |v| {
        if !dump_fields || dump_error.is_some() {
            return;
        }
        let path = fields_dir.join(format!("step_{:05}.vtk", v.sample.step));
        let written = std::fs::File::create(&path).and_then(|f| {
            let fields = [
                PointField { name: "alpha", values: &v.state.alpha, ncomp: 1 },
                PointField { name: "u", values: &v.state.u, ncomp: 2 },
            ];
            write_vtk(&mut BufWriter::new(f), v.mesh, &format!("step {} t {}", v.sample.step, v.sample.t), &fields)
        });
        if let Err(e) = written {
            dump_error = Some(e);
        }
    });
    if let Some(e) = dump_error {
        bail!("writing field dumps: {e}");
    }
    let res = match res {
        Ok(r) => r,
        Err(e) => {
            let detail = json!({ "reason": e.to_string(), "config_hash": hash, "design_id": id });
            write_json(&out.join("summary.json"), &Outcome::new(Status::SimulationFailed, detail.clone()).to_json())?;
            return Ok(Outcome::new(Status::SimulationFailed, detail));
        }
    };
    write_trace(&out.join("trace.csv"), hash, &res.trace)?;
    let t = &cfg.toughness;
    let toughness = effective_toughness(&res.trace, t.window, t.half_width);
    let last = res.trace.samples.last();
    let mut detail = json!({
        "config_hash": hash,
        "design_id": id,
        "design": x,
        "w": cfg.w,
        "termination": res.termination,
        "steps": res.trace.samples.len(),
        "final_crack_length": last.map(|s| s.crack_length),
        "final_tip": last.map(|s| s.tip),
        "backtracks": res.backtracks,
        "unresolved_advances": res.unresolved_advances,
        "dt_halvings": res.dt_halvings,
        "max_irreversibility_violation": res.max_irreversibility_violation,
        "wall_seconds": started.elapsed().as_secs_f64(),
    });
    let status = match &toughness {
        Ok(r) => {
            write_toughness(&out.join("toughness.csv"), hash, &[ToughnessRow::new(&id, cfg.w, r)])?;
            detail["g_eff"] = json!(r.g_eff);
            detail["window"] = json!(r.window);
            Status::Ok
        }
        Err(e) => {
            detail["reason"] = json!(e.to_string());
            Status::WindowNotReached
        }
    };
    let outcome = Outcome::new(status, detail);
    write_json(&out.join("summary.json"), &outcome.to_json())?;
    Ok(outcome)
}

fn make_evaluator<'a>(cfg: &'a RunConfig, hash: &str) -> Box<dyn Evaluator + 'a> {
    match cfg.evaluator {
        EvaluatorKind::Simulation => Box::new(SimulationEvaluator::new(cfg, hash, Some(cfg.out.join("runs")))),
        EvaluatorKind::Stub => Box::new(AnalyticStub),
    }
}

/// Evaluates every grid point at every scenario; infeasible points are
/// recorded without simulating.
pub fn sweep(cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    let problem = Problem::new(cfg);
    if cfg.sweep.axes.is_empty() {
        bail!("sweep needs at least one axis (sweep.axes)");
    }
    let mut axes = Vec::new();
    for a in &cfg.sweep.axes {
        let k = problem
            .names
            .iter()
            .position(|n| *n == a.name)
            .with_context(|| format!("unknown sweep parameter {:?}; expected one of {:?}", a.name, problem.names))?;
        axes.push((k, a.grid()?));
    }
    let mut points = vec![problem.base.clone()];
    for (k, grid) in &axes {
        points = points
            .iter()
            .flat_map(|p| {
                grid.iter().map(move |v| {
                    let mut q = p.clone();
                    q[*k] = *v;
                    q
                })
            })
            .collect();
    }
    let evaluator = make_evaluator(cfg, hash);
    let ns = cfg.scenarios.len();
    let feasible: Vec<bool> = points.iter().map(|p| problem.is_feasible(p)).collect();
    let jobs: Vec<(usize, usize)> = (0..points.len()).filter(|&i| feasible[i]).flat_map(|i| (0..ns).map(move |s| (i, s))).collect();
    let results: Vec<Result<f64, String>> = jobs.par_iter().map(|&(i, s)| evaluator.evaluate(&points[i], s)).collect();
    let mut by_job = jobs.iter().zip(results);

    let mut w = csv_writer(&cfg.out.join("sweep.csv"), hash)?;
    let mut header: Vec<String> = axes.iter().map(|(k, _)| problem.names[*k].clone()).collect();
    header.extend(["w", "g_eff", "status", "clearance", "reason"].map(String::from));
    w.write_record(&header)?;
    let (mut n_ok, mut n_failed, mut n_infeasible) = (0, 0, 0);
    for (i, p) in points.iter().enumerate() {
        let clearance = problem.clearance(p);
        for s in 0..ns {
            let mut row: Vec<String> = axes.iter().map(|(k, _)| p[*k].to_string()).collect();
            row.push(cfg.scenarios[s].to_string());
            if !feasible[i] {
                n_infeasible += 1;
                row.extend([String::new(), "infeasible".into(), clearance.to_string(), String::new()]);
            } else {
                let (_, r) = by_job.next().expect("one result per feasible job");
                match r {
                    Ok(g) => {
                        n_ok += 1;
                        row.extend([g.to_string(), "ok".into(), clearance.to_string(), String::new()]);
                    }
                    Err(e) => {
                        n_failed += 1;
                        row.extend([String::new(), "failed".into(), clearance.to_string(), e]);
                    }
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(Outcome::new(
        Status::Ok,
        json!({ "config_hash": hash, "rows": points.len() * ns, "ok": n_ok, "failed": n_failed, "infeasible": n_infeasible }),
    ))
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    config_hash: String,
    record: CampaignRecord,
}

#[derive(Serialize)]
struct CheckpointRef<'a> {
    config_hash: &'a str,
    record: &'a CampaignRecord,
}

pub fn checkpoint_path(out: &Path) -> PathBuf {
    out.join("checkpoint.json")
}

pub fn load_checkpoint(path: &Path) -> Result<(String, CampaignRecord)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let c: Checkpoint = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((c.config_hash, c.record))
}

fn write_campaign_tables(cfg: &RunConfig, hash: &str, names: &[String], record: &CampaignRecord) -> Result<()> {
    let mut w = csv_writer(&cfg.out.join("convergence.csv"), hash)?;
    w.write_record(["iteration", "n_evaluations", "best_objective"])?;
    for l in &record.iterations {
        w.write_record([l.iteration.to_string(), l.n_evaluations.to_string(), l.best_objective.map_or(String::new(), |v| v.to_string())])?;
    }
    w.flush()?;

    let mut w = csv_writer(&cfg.out.join("evaluations.csv"), hash)?;
    let mut header = vec!["iteration".to_string(), "design_id".to_string()];
    header.extend(names.iter().cloned());
    header.extend(cfg.scenarios.iter().map(|s| format!("g_w{s}")));
    header.push("objective".into());
    w.write_record(&header)?;
    for e in &record.evaluations {
        let mut row = vec![e.iteration.to_string(), design_id(&e.x)];
        row.extend(e.x.iter().map(|v| v.to_string()));
        row.extend(e.outcomes.iter().map(|o| o.as_ref().map_or(String::new(), |v| v.to_string())));
        row.push(e.objective.map_or(String::new(), |v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs (or resumes) the campaign, checkpointing after every iteration.
pub fn optimize(cfg: &RunConfig, hash: &str, resume: bool) -> Result<Outcome> {
    let problem = Problem::new(cfg);
    let path = checkpoint_path(&cfg.out);
    let mut record = if resume && path.exists() {
        let (found, record) = load_checkpoint(&path)?;
        if found != hash {
            return Ok(Outcome::new(
                Status::ConfigMismatch,
                json!({ "reason": "checkpoint was written with a different configuration", "expected": hash, "found": found }),
            ));
        }
        log::info!("resuming after {} iterations", record.completed());
        record
    } else {
        CampaignRecord::new(cfg.campaign, &problem.bounds)
    };
    std::fs::create_dir_all(&cfg.out)?;
    let evaluator = make_evaluator(cfg, hash);
    let feasible = |x: &[f64]| problem.is_feasible(x);
    run_campaign(&mut record, evaluator.as_ref(), &feasible, |r| {
        write_json(&path, &CheckpointRef { config_hash: hash, record: r })
            .and_then(|_| write_campaign_tables(cfg, hash, &problem.names, r))
            .map_err(|e| BayesError::Checkpoint(format!("{e:#}")))
    })?;
    // Nothing new was run when resuming a finished campaign; refresh the tables anyway.
    write_campaign_tables(cfg, hash, &problem.names, &record)?;

    let best = record.best_evaluation().map(|e| {
        let scenarios: Vec<Value> = e
            .outcomes
            .iter()
            .enumerate()
            .map(|(s, o)| {
                let trace = match cfg.evaluator {
                    EvaluatorKind::Simulation => Some(cfg.out.join("runs").join(format!("{}-w{s}", design_id(&e.x))).join("trace.csv")),
                    EvaluatorKind::Stub => None,
                };
                json!({ "w": cfg.scenarios[s], "g_eff": o.as_ref().ok(), "trace": trace })
            })
            .collect();
        json!({ "design_id": design_id(&e.x), "design": named(&problem.names, &e.x), "objective": e.objective, "scenarios": scenarios })
    });
    write_json(&cfg.out.join("best.json"), &best)?;
    Ok(Outcome::new(
        Status::Ok,
        json!({
            "config_hash": hash,
            "iterations": record.completed().saturating_sub(1),
            "designs": record.evaluations.len(),
            "scenario_evaluations": record.n_scenario_evaluations(),
            "best": best,
        }),
    ))
}

/// Re-derives the effective toughness of an existing trace with the configured window and smoothing.
pub fn report(cfg: &RunConfig, hash: &str, trace_path: &Path) -> Result<Outcome> {
    let trace = read_trace(trace_path)?;
    let t = &cfg.toughness;
    match effective_toughness(&trace, t.window, t.half_width) {
        Ok(r) => {
            let id = trace_path
                .parent()
                .and_then(|p| p.file_name())
                .map_or_else(|| "report".to_string(), |n| n.to_string_lossy().into_owned());
            write_toughness(&cfg.out.join("toughness.csv"), hash, &[ToughnessRow::new(&id, cfg.w, &r)])?;
            Ok(Outcome::new(
                Status::Ok,
                json!({ "g_eff": r.g_eff, "window": r.window, "half_width": r.half_width, "n_samples": r.n_samples }),
            ))
        }
        Err(e) => Ok(Outcome::new(Status::WindowNotReached, json!({ "reason": e.to_string() }))),
    }
}

