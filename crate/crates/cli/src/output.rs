//! CSV and JSON artifacts. Every CSV starts with a `# config_hash:` comment.

use anyhow::{Context, Result};
use fracopt::{JSample, JTrace, ToughnessReport};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub fn csv_writer(path: &Path, hash: &str) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(file, "# config_hash: {hash}")?;
    Ok(csv::Writer::from_writer(file))
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    step: usize,
    t: f64,
    tip_x: f64,
    tip_y: f64,
    crack_length: f64,
    #[serde(rename = "J")]
    j: f64,
    energy: f64,
    n_dofs: usize,
}

pub fn write_trace(path: &Path, hash: &str, trace: &JTrace) -> Result<()> {
    let mut w = csv_writer(path, hash)?;
    for s in &trace.samples {
        w.serialize(TraceRow {
            step: s.step,
            t: s.t,
            tip_x: s.tip[0],
            tip_y: s.tip[1],
            crack_length: s.crack_length,
            j: s.j,
            energy: s.energy,
            n_dofs: s.n_dofs,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<JTrace> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut samples = Vec::new();
    for row in r.deserialize() {
        let row: TraceRow = row.with_context(|| format!("reading {}", path.display()))?;
        samples.push(JSample {
            step: row.step,
            t: row.t,
            tip: [row.tip_x, row.tip_y],
            crack_length: row.crack_length,
            j: row.j,
            energy: row.energy,
            n_dofs: row.n_dofs,
        });
    }
    Ok(JTrace { samples })
}

#[derive(Debug, Clone, Serialize)]
pub struct ToughnessRow {
    pub design_id: String,
    pub w: f64,
    pub g_eff: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub half_width: usize,
    pub n_samples: usize,
}

impl ToughnessRow {
    pub fn new(design_id: &str, w: f64, r: &ToughnessReport) -> Self {
        Self {
            design_id: design_id.to_string(),
            w,
            g_eff: r.g_eff,
            window_lo: r.window.0,
            window_hi: r.window.1,
            half_width: r.half_width,
            n_samples: r.n_samples,
        }
    }
}

pub fn write_toughness(path: &Path, hash: &str, rows: &[ToughnessRow]) -> Result<()> {
    let mut w = csv_writer(path, hash)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `value` as pretty JSON through a temporary file and a rename.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
