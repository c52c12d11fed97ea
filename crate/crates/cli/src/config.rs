//! Experiment configuration: one JSON document, dotted `--set` overrides,
//! and validation into library types.

use std::fmt;
use std::path::Path;

use powerlaw_revivals::analysis::DetectorSettings;
use powerlaw_revivals::quantum::{auto_grid, DriveShape, Grid};
use powerlaw_revivals::{DomainKind, DriveSpec, PotentialSpec, SpectrumModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Raised for anything wrong with the configuration itself; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialConfig,
    pub kbar: f64,
    pub n_bar: f64,
    #[serde(default = "default_sigma")]
    pub sigma_n: f64,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub detector: DetectorSettings,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_sigma() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default = "one")]
    pub v0: f64,
    pub k: f64,
    #[serde(default = "default_domain")]
    pub domain: DomainKind,
    #[serde(default)]
    pub maslov_gamma: Option<u8>,
}

fn one() -> f64 {
    1.0
}

fn default_domain() -> DomainKind {
    DomainKind::Symmetric
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default)]
    pub lambda: f64,
    /// Estimated from the eigenbasis when absent.
    #[serde(default)]
    pub v_coupling: Option<f64>,
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default)]
    pub shape: DriveShape,
}

fn default_order() -> u32 {
    1
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            v_coupling: None,
            order: 1,
            shape: DriveShape::Potential,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Gaussian population of eigenstates around `n_bar` with width `sigma_n`.
    Levels {},
    /// Position-space Gaussian.
    Gaussian {
        x0: f64,
        width: f64,
        #[serde(default)]
        p0: f64,
    },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Levels {}
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub x_min: Option<f64>,
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default = "default_points")]
    pub n_points: usize,
    /// Eigenstates kept in the basis; defaults to `n_bar + 8 sigma_n + 12`.
    #[serde(default)]
    pub n_levels: Option<usize>,
}

fn default_points() -> usize {
    512
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: None,
            x_max: None,
            n_points: default_points(),
            n_levels: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub steps_per_period: Option<u32>,
    #[serde(default)]
    pub total_time: Option<f64>,
    /// Run length in drive periods `2 pi`.
    #[serde(default)]
    pub periods: Option<f64>,
    #[serde(default)]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Add eigensolver energies next to the WKB column.
    #[serde(default)]
    pub numeric: bool,
}

fn default_levels() -> usize {
    30
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            numeric: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_autocorrelation")]
    pub autocorrelation: String,
    #[serde(default = "default_report")]
    pub report: String,
    /// Write a wave-function snapshot every this many samples.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

fn default_autocorrelation() -> String {
    "autocorrelation.csv".into()
}

fn default_report() -> String {
    "report.json".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            autocorrelation: default_autocorrelation(),
            report: default_report(),
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepTarget {
    #[default]
    Times,
    Evolve,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted config path, e.g. `n_bar` or `drive.lambda`.
    pub parameter: String,
    pub values: Vec<Value>,
    #[serde(default)]
    pub target: SweepTarget,
}

/// Parse `value` as JSON, falling back to a bare string.
fn parse_override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Set `path` (dot separated) in `doc`, creating intermediate objects.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> anyhow::Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(config_err(format!("malformed key path `{path}`")));
    }
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let map = node
            .as_object_mut()
            .ok_or_else(|| config_err(format!("`{path}`: `{key}` is inside a non-object value")))?;
        let child = map
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
        if child.is_null() {
            *child = Value::Object(Default::default());
        }
        node = child;
    }
    let map = node
        .as_object_mut()
        .ok_or_else(|| config_err(format!("`{path}` does not point into an object")))?;
    map.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

pub fn apply_overrides(doc: &mut Value, overrides: &[String]) -> anyhow::Result<()> {
    for item in overrides {
        let (path, raw) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("override `{item}` is not of the form key=value")))?;
        set_path(doc, path.trim(), parse_override_value(raw.trim()))?;
    }
    Ok(())
}

pub fn load_document(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn from_document(doc: &Value) -> anyhow::Result<Self> {
        let config: Self = serde_json::from_value(doc.clone()).map_err(|e| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if !(self.sigma_n > 0.0 && self.sigma_n.is_finite()) {
            return Err(config_err(format!("sigma_n must be positive, got {}", self.sigma_n)));
        }
        if self.run.dt.is_some() && self.run.steps_per_period.is_some() {
            return Err(config_err("run: give either dt or steps_per_period, not both"));
        }
        if self.run.total_time.is_some() && self.run.periods.is_some() {
            return Err(config_err("run: give either total_time or periods, not both"));
        }
        if self.run.stride == Some(0) {
            return Err(config_err("run.stride must be >= 1"));
        }
        if self.grid.x_min.is_some() != self.grid.x_max.is_some() {
            return Err(config_err("grid: x_min and x_max must be given together"));
        }
        self.potential_spec()?;
        self.spectrum_model()?;
        Ok(())
    }

    pub fn potential_spec(&self) -> anyhow::Result<PotentialSpec> {
        let p = &self.potential;
        let spec = match p.maslov_gamma {
            Some(g) => PotentialSpec::with_maslov(p.v0, p.k, g, p.domain),
            None => PotentialSpec::new(p.v0, p.k, p.domain),
        };
        spec.map_err(|e| config_err(format!("potential: {e}")))
    }

    pub fn spectrum_model(&self) -> anyhow::Result<SpectrumModel> {
        SpectrumModel::new(self.potential_spec()?, self.kbar, self.n_bar).map_err(|e| config_err(e.to_string()))
    }

    /// Drive with an explicit coupling, or `None` when it must be estimated.
    pub fn explicit_drive(&self) -> anyhow::Result<Option<DriveSpec>> {
        let d = &self.drive;
        let coupling = match (d.v_coupling, d.lambda == 0.0) {
            (Some(v), _) => v,
            (None, true) => 0.0,
            (None, false) => return Ok(None),
        };
        DriveSpec::new(d.lambda, coupling, d.order)
            .map(Some)
            .map_err(|e| config_err(format!("drive: {e}")))
    }

    pub fn n_bar_index(&self) -> anyhow::Result<usize> {
        if self.n_bar < 0.0 || self.n_bar.fract() != 0.0 {
            return Err(config_err(format!(
                "n_bar must be a non-negative integer for eigenbasis work, got {}",
                self.n_bar
            )));
        }
        Ok(self.n_bar as usize)
    }

    pub fn n_levels(&self) -> anyhow::Result<usize> {
        match self.grid.n_levels {
            Some(n) => Ok(n),
            None => Ok(self.n_bar_index()? + (8.0 * self.sigma_n).ceil() as usize + 12),
        }
    }

    pub fn grid(&self, n_levels: usize) -> anyhow::Result<Grid> {
        let result = match (self.grid.x_min, self.grid.x_max) {
            (Some(a), Some(b)) => Grid::new(a, b, self.grid.n_points),
            _ => auto_grid(&self.potential_spec()?, self.kbar, n_levels, self.grid.n_points),
        };
        result.map_err(|e| config_err(format!("grid: {e}")))
    }
}
