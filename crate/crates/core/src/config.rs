//! Run configuration: one flat JSON object with dotted keys, applied on top
//! of the defaults and deserialized strictly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::field::{GridPolicy, Point, SpectralProfile};
use crate::quantize::{CutoffSpec, SymbolSpec, SymbolVariant};
use crate::tolerances;

/// Geometric time schedule `t_min · ratio^k`, `k < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub t_min: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { t_min: 4.0, ratio: 2.0, count: 7 }
    }
}

impl Schedule {
    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.t_min * self.ratio.powi(k as i32)).collect()
    }

    pub fn t_max(&self) -> f64 {
        self.t_min * self.ratio.powi(self.count.saturating_sub(1) as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.ratio > 1.0 && self.count >= 1 && self.t_max().is_finite()) {
            return Err(Error::Config(format!(
                "schedule needs t_min > 0, ratio > 1, count ≥ 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub margin: f64,
    /// Samples per axis cap; the dimension default when absent.
    pub n_cap: Option<usize>,
    pub n_min: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { margin: tolerances::BOX_MARGIN, n_cap: None, n_min: 16 }
    }
}

impl GridConfig {
    pub fn policy(&self, dim: usize) -> GridPolicy {
        let base = GridPolicy::for_dim(dim);
        GridPolicy { margin: self.margin, n_cap: self.n_cap.unwrap_or(base.n_cap), n_min: self.n_min }
    }
}

/// Klein-Gordon data and speed window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgConfig {
    /// Profile of `ŵ₁`; `w₀` uses the top-level data profile.
    pub w1: Option<SpectralProfile>,
    pub r0: f64,
    /// Upper speed; absent means `+∞`.
    pub r1: Option<f64>,
}

impl Default for KgConfig {
    fn default() -> Self {
        Self { w1: Some(SpectralProfile::annulus(0.2, 0.6, 0.7)), r0: 0.3, r1: Some(0.7) }
    }
}

/// Test function `g` of the velocity variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocityFunction {
    Constant { value: f64 },
    Gaussian { center: Point, width: f64 },
    /// Smoothed indicator of `inner < |v| < outer` with edges of width `edge`.
    SmoothedAnnulus { inner: f64, outer: f64, edge: f64 },
}

impl VelocityFunction {
    pub fn value(&self, v: Point) -> f64 {
        use crate::quantize::smooth_step;
        match *self {
            VelocityFunction::Constant { value } => value,
            VelocityFunction::Gaussian { center, width } => {
                let d = [v[0] - center[0], v[1] - center[1]];
                (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * width * width)).exp()
            }
            VelocityFunction::SmoothedAnnulus { inner, outer, edge } => {
                let r = v[0].hypot(v[1]);
                smooth_step((r - inner) / edge + 0.5) * smooth_step((outer - r) / edge + 0.5)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub g: VelocityFunction,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { g: VelocityFunction::SmoothedAnnulus { inner: 0.4, outer: 0.6, edge: 0.1 } }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpNormConfig {
    /// Samples per axis of every sweep grid.
    pub n: usize,
    pub iters: usize,
    /// Rows with `t` below this are reported but left out of the verdict.
    pub t_from: f64,
}

impl Default for OpNormConfig {
    fn default() -> Self {
        Self { n: 512, iters: 4000, t_from: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GchiConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub count: usize,
}

impl Default for GchiConfig {
    fn default() -> Self {
        Self { rho_min: 0.5, rho_max: 4.0, count: 10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatPhaseConfig {
    pub mu: f64,
    pub rho: f64,
    pub lambda_mu2_min: f64,
    pub lambda_mu2_max: f64,
    pub count: usize,
}

impl Default for StatPhaseConfig {
    fn default() -> Self {
        Self { mu: 0.1, rho: 1.5, lambda_mu2_min: 10.0, lambda_mu2_max: 1e4, count: 7 }
    }
}

impl StatPhaseConfig {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count.max(2);
        let ratio = (self.lambda_mu2_max / self.lambda_mu2_min).powf(1.0 / (n - 1) as f64);
        (0..n).map(|k| self.lambda_mu2_min * ratio.powi(k as i32)).collect()
    }
}

/// Every parameter of a study. Unset keys keep these defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub model: String,
    /// Water depth for the finite-depth relations.
    pub depth: f64,
    pub variant: SymbolVariant,
    pub dim: usize,
    pub cutoff: CutoffSpec,
    pub data: SpectralProfile,
    pub schedule: Schedule,
    pub grid: GridConfig,
    /// Run `−t` as well as `t`.
    pub both_signs: bool,
    pub seed: u64,
    pub kg: KgConfig,
    pub profile: ProfileConfig,
    pub opnorm: OpNormConfig,
    pub gchi: GchiConfig,
    pub statphase: StatPhaseConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: "converge".into(),
            model: "schrodinger".into(),
            depth: 1.0,
            variant: SymbolVariant::Plain,
            dim: 1,
            cutoff: CutoffSpec { delta: 0.25, ..CutoffSpec::default() },
            data: SpectralProfile::annulus(1.0, 2.0, 1.0),
            schedule: Schedule::default(),
            grid: GridConfig::default(),
            both_signs: true,
            seed: 7,
            kg: KgConfig::default(),
            profile: ProfileConfig::default(),
            opnorm: OpNormConfig::default(),
            gchi: GchiConfig::default(),
            statphase: StatPhaseConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn dispersion(&self) -> Result<DispersionModel> {
        DispersionModel::from_id(&self.model, self.depth)
    }

    pub fn symbol(&self) -> Result<SymbolSpec> {
        Ok(SymbolSpec::new(self.variant, self.dispersion()?, self.cutoff))
    }

    /// Structural checks; hypothesis checks live with the symbol.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Unsupported(format!("dimension {} (only 1 and 2)", self.dim)));
        }
        self.schedule.validate()?;
        self.data.validate()?;
        if !(self.grid.margin >= 1.0) {
            return Err(Error::Config(format!("grid.margin must be ≥ 1, got {}", self.grid.margin)));
        }
        Ok(())
    }

    /// Effective parameters as flat dotted keys.
    pub fn to_dotted(&self) -> BTreeMap<String, Value> {
        let mut out = BTreeMap::new();
        flatten("", &serde_json::to_value(self).expect("config serializes"), &mut out);
        out
    }

    /// Defaults overridden by `entries`, in order. Setting a `…kind` key
    /// replaces the enclosing tagged object.
    pub fn from_dotted<'a>(entries: impl IntoIterator<Item = (&'a str, Value)>) -> Result<Self> {
        let mut root = serde_json::to_value(Self::default()).expect("config serializes");
        let mut entries: Vec<(&str, Value)> = entries.into_iter().collect();
        // tag keys first so that their siblings land in the fresh object
        entries.sort_by_key(|(k, _)| !(k.ends_with(".kind") || *k == "kind"));
        for (key, value) in entries {
            set_path(&mut root, key, value)?;
        }
        serde_json::from_value(root).map_err(|e| Error::Config(e.to_string()))
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed key '{key}'")));
    }
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        let map = match node {
            Value::Object(m) => m,
            other => {
                // a null optional section becomes an object on first write
                if other.is_null() {
                    *other = Value::Object(Map::new());
                    match other {
                        Value::Object(m) => m,
                        _ => unreachable!(),
                    }
                } else {
                    return Err(Error::Config(format!("key '{key}' descends into a scalar")));
                }
            }
        };
        if last {
            if *part == "kind" && map.get("kind") != Some(&value) {
                map.clear();
            }
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    Ok(())
}
