//! Run configuration: one TOML file plus `key=value` overrides.

use anyhow::{bail, Context, Result};
use fracopt::geometry::{DesignVector, CRACK_OFFSETS};
use fracopt::SimulationConfig;
use fracopt_bayes::{Bounds, CampaignConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    /// Surfing simulations of the nine-parameter design.
    Simulation,
    /// Two-parameter analytic problem; for testing the optimizer.
    Stub,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToughnessConfig {
    /// Tip positions `(x_lo, x_hi)` whose J values enter the estimate.
    pub window: (f64, f64),
    /// Half-width of the moving-average filter, in samples.
    pub half_width: usize,
}

impl Default for ToughnessConfig {
    fn default() -> Self {
        Self { window: (50.0, 80.0), half_width: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// One grid axis: explicit `values`, or `points` evenly spaced values in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl SweepAxis {
    pub fn grid(&self) -> Result<Vec<f64>> {
        match (&self.values, self.lo, self.hi, self.points) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(lo), Some(hi), Some(n)) if n >= 1 && lo <= hi => {
                if n == 1 {
                    return Ok(vec![lo]);
                }
                Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
            }
            _ => bail!("sweep axis {:?} needs either non-empty `values` or `lo`, `hi` and `points`", self.name),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub evaluator: EvaluatorKind,
    /// Output directory.
    pub out: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    /// Minimum clearance between inclusion boundaries.
    pub z_min: f64,
    /// When false the domain is homogeneous matrix material.
    pub inclusions: bool,
    /// Design of `simulate` and the fixed values of a sweep.
    pub design: DesignVector,
    /// Crack offset of `simulate`.
    pub w: f64,
    /// Crack offsets evaluated per design by `sweep` and `optimize`.
    pub scenarios: Vec<f64>,
    pub toughness: ToughnessConfig,
    pub simulation: SimulationConfig,
    /// Search box of `optimize`; defaults to the global design bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    pub campaign: CampaignConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            evaluator: EvaluatorKind::Simulation,
            out: PathBuf::from("out"),
            workers: 0,
            z_min: 1.0,
            inclusions: true,
            design: DesignVector::default(),
            w: 0.0,
            scenarios: CRACK_OFFSETS.to_vec(),
            toughness: ToughnessConfig::default(),
            simulation: SimulationConfig::default(),
            bounds: None,
            campaign: CampaignConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// Sets `path` (dot separated) in a TOML table, creating tables on the way.
fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut keys = path.split('.').peekable();
    let mut cur = table;
    while let Some(k) = keys.next() {
        if k.is_empty() {
            bail!("empty key segment in {path:?}");
        }
        if keys.peek().is_none() {
            cur.insert(k.to_string(), value);
            return Ok(());
        }
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().with_context(|| format!("{k:?} in {path:?} is not a table"))?;
    }
    unreachable!()
}

/// Parses the right-hand side of `--set` as a TOML value, falling back to a string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_table(text.parse::<toml::Table>().context("invalid TOML")?)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: Self = toml::Value::Table(table).try_into().context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (if any) and applies `key=value` overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))?
                .parse::<toml::Table>()
                .with_context(|| format!("parsing {}", p.display()))?,
            None => toml::Table::new(),
        };
        for o in overrides {
            let (k, v) = o.split_once('=').with_context(|| format!("override {o:?} is not of the form key=value"))?;
            set_path(&mut table, k.trim(), parse_value(v.trim()))?;
        }
        Self::from_table(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    /// SHA-256 of the configuration without the output directory and worker
    /// count, which do not affect results.
    pub fn hash(&self) -> String {
        let canonical = Self { out: PathBuf::new(), workers: 0, ..self.clone() };
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.simulation.validate()?;
        self.campaign.validate()?;
        // TOML integers are signed 64-bit.
        if self.campaign.seed > i64::MAX as u64 {
            bail!("seed must be at most {}", i64::MAX);
        }
        if self.scenarios.is_empty() {
            bail!("at least one scenario offset is required");
        }
        let (lo, hi) = self.toughness.window;
        if !(lo < hi) {
            bail!("toughness window must satisfy lo < hi, got ({lo}, {hi})");
        }
        if !(self.z_min >= 0.0) {
            bail!("z_min must be non-negative");
        }
        if let Some(b) = &self.bounds {
            let dim = match self.evaluator {
                EvaluatorKind::Simulation => DesignVector::DIM,
                EvaluatorKind::Stub => 2,
            };
            if b.lower.len() != dim || b.upper.len() != dim {
                bail!("bounds need {dim} lower and upper values");
            }
            if b.lower.iter().zip(&b.upper).any(|(l, u)| !(l < u)) {
                bail!("every lower bound must be below its upper bound");
            }
        }
        if self.evaluator == EvaluatorKind::Stub && self.scenarios.len() != 4 {
            bail!("the stub evaluator has exactly four scenarios");
        }
        if self.sweep.axes.len() > 2 {
            bail!("a sweep has one or two axes");
        }
        for a in &self.sweep.axes {
            a.grid()?;
        }
        Ok(())
    }

    /// Parameter names, base point and global search box of the configured problem.
    pub fn problem_space(&self) -> (Vec<String>, Vec<f64>, Bounds) {
        let (names, base, (lo, hi)): (Vec<String>, Vec<f64>, (Vec<f64>, Vec<f64>)) = match self.evaluator {
            EvaluatorKind::Simulation => {
                let (lo, hi) = DesignVector::bounds();
                (
                    DesignVector::NAMES.iter().map(|s| s.to_string()).collect(),
                    self.design.to_array().to_vec(),
                    (lo.to_vec(), hi.to_vec()),
                )
            }
            EvaluatorKind::Stub => {
                let b = fracopt_bayes::AnalyticStub::bounds();
                (vec!["x1".into(), "x2".into()], vec![self.design.x1, self.design.x2], (b.lower, b.upper))
            }
        };
        let bounds = match &self.bounds {
            Some(b) => Bounds::new(b.lower.clone(), b.upper.clone()),
            None => Bounds::new(lo, hi),
        };
        (names, base, bounds)
    }
}
