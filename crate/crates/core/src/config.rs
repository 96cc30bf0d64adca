//! JSON run configuration.
//!
//! ```json
//! {
//!   "rho_hl": -5, "Pm": 2, "Nm": 1,
//!   "lambda2": 1, "epsilon": 0.1, "alpha0": 1, "alpha1": 1,
//!   "V": 0, "dpsi0_pzc": 0, "dpsi1_pzc": 0,
//!   "kinetics": { "P": { "side0": { "m": 1, "k": 1, "a": 0.5, "b": 0.5 } } },
//!   "grid": { "M": 100 },
//!   "time": { "dt": "auto", "safety": 0.9, "T": 0.5 },
//!   "init": { "P": { "constant": 1 }, "N": { "file": "n0.csv" } },
//!   "output": { "snapshot_times": [0.25], "series": true }
//! }
//! ```
//!
//! Only `rho_hl`, `Pm` and `Nm` are required. Unknown keys are rejected at
//! every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::params::{check_admissibility, InterfaceKinetics, KineticsTable, ModelParams};
use crate::timeloop::{
    DtSpec, FieldSpec, InitialData, OutputControl, Overrides, RunConfig, TimeControl,
    DEFAULT_SAFETY,
};

const DEFAULT_INTERVALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub rho_hl: f64,
    #[serde(rename = "Pm")]
    pub p_max: f64,
    #[serde(rename = "Nm")]
    pub n_max: f64,
    #[serde(default = "one")]
    pub lambda2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub alpha0: f64,
    #[serde(default = "one")]
    pub alpha1: f64,
    #[serde(rename = "V", default)]
    pub v: f64,
    #[serde(default)]
    pub dpsi0_pzc: f64,
    #[serde(default)]
    pub dpsi1_pzc: f64,
    #[serde(default)]
    pub kinetics: KineticsFile,
    #[serde(default)]
    pub grid: GridFile,
    #[serde(default)]
    pub time: TimeFile,
    #[serde(default)]
    pub init: InitFile,
    #[serde(default)]
    pub output: OutputFile,
}

fn one() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeciesKineticsFile {
    pub side0: InterfaceKinetics,
    pub side1: InterfaceKinetics,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KineticsFile {
    #[serde(rename = "P")]
    pub p: SpeciesKineticsFile,
    #[serde(rename = "N")]
    pub n: SpeciesKineticsFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(rename = "M")]
    pub intervals: usize,
}

impl Default for GridFile {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtFile {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeFile {
    pub dt: DtFile,
    pub safety: f64,
    #[serde(rename = "T")]
    pub final_time: f64,
}

impl Default for TimeFile {
    fn default() -> Self {
        let t = TimeControl::default();
        Self {
            dt: DtFile::Keyword(AutoKeyword::Auto),
            safety: DEFAULT_SAFETY,
            final_time: t.final_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldFile {
    Constant(f64),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitFile {
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<FieldFile>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<FieldFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputFile {
    pub snapshot_times: Vec<f64>,
    pub series: bool,
}

impl Default for OutputFile {
    fn default() -> Self {
        let o = OutputControl::default();
        Self {
            snapshot_times: o.snapshot_times,
            series: o.series,
        }
    }
}

impl ConfigFile {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            lambda2: self.lambda2,
            epsilon: self.epsilon,
            rho_hl: self.rho_hl,
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            v: self.v,
            dpsi0_pzc: self.dpsi0_pzc,
            dpsi1_pzc: self.dpsi1_pzc,
            p_max: self.p_max,
            n_max: self.n_max,
            kinetics: KineticsTable {
                p: [self.kinetics.p.side0, self.kinetics.p.side1],
                n: [self.kinetics.n.side0, self.kinetics.n.side1],
            },
        }
    }

    /// Makes relative initial-data paths absolute with respect to `base`.
    fn anchor_paths(&mut self, base: &Path) {
        for spec in [&mut self.init.p, &mut self.init.n].into_iter().flatten() {
            if let FieldFile::File(path) = spec {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }

    pub fn into_run_config(self, overrides: Overrides) -> Result<RunConfig> {
        let params = self.params();
        let field = |f: Option<FieldFile>| {
            f.map(|f| match f {
                FieldFile::Constant(v) => FieldSpec::Constant(v),
                FieldFile::File(p) => FieldSpec::File(p),
            })
        };
        Ok(RunConfig {
            params,
            grid: Grid::new(self.grid.intervals)?,
            time: TimeControl {
                dt: match self.time.dt {
                    DtFile::Value(v) => DtSpec::Fixed(v),
                    DtFile::Keyword(AutoKeyword::Auto) => DtSpec::Auto,
                },
                safety: self.time.safety,
                final_time: self.time.final_time,
            },
            init: InitialData {
                p: field(self.init.p),
                n: field(self.init.n),
            },
            output: OutputControl {
                snapshot_times: self.output.snapshot_times,
                series: self.output.series,
            },
            overrides,
        })
    }

    pub fn from_run_config(cfg: &RunConfig) -> Self {
        let p = &cfg.params;
        let field = |f: &Option<FieldSpec>| {
            f.as_ref().map(|f| match f {
                FieldSpec::Constant(v) => FieldFile::Constant(*v),
                FieldSpec::File(p) => FieldFile::File(p.clone()),
            })
        };
        Self {
            rho_hl: p.rho_hl,
            p_max: p.p_max,
            n_max: p.n_max,
            lambda2: p.lambda2,
            epsilon: p.epsilon,
            alpha0: p.alpha0,
            alpha1: p.alpha1,
            v: p.v,
            dpsi0_pzc: p.dpsi0_pzc,
            dpsi1_pzc: p.dpsi1_pzc,
            kinetics: KineticsFile {
                p: SpeciesKineticsFile {
                    side0: p.kinetics.p[0],
                    side1: p.kinetics.p[1],
                },
                n: SpeciesKineticsFile {
                    side0: p.kinetics.n[0],
                    side1: p.kinetics.n[1],
                },
            },
            grid: GridFile {
                intervals: cfg.grid.intervals(),
            },
            time: TimeFile {
                dt: match cfg.time.dt {
                    DtSpec::Auto => DtFile::Keyword(AutoKeyword::Auto),
                    DtSpec::Fixed(v) => DtFile::Value(v),
                },
                safety: cfg.time.safety,
                final_time: cfg.time.final_time,
            },
            init: InitFile {
                p: field(&cfg.init.p),
                n: field(&cfg.init.n),
            },
            output: OutputFile {
                snapshot_times: cfg.output.snapshot_times.clone(),
                series: cfg.output.series,
            },
        }
    }
}

/// Sets `key` (dotted path, e.g. `kinetics.P.side0.m`) in a JSON document.
///
/// `value` is parsed as JSON when possible (numbers, booleans, arrays) and
/// taken as a string otherwise, so `time.dt=auto` works unquoted.
pub fn set_key(doc: &mut Value, key: &str, value: &str) -> Result<()> {
    let parsed: Value =
        serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!("cannot set `{key}`: `{part}` has no parent object"))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config("empty key".into()))
}

/// Parses a configuration document without checking admissibility.
pub fn parse_config(doc: Value, base: &Path, overrides: Overrides) -> Result<RunConfig> {
    let mut file: ConfigFile = serde_json::from_value(doc)?;
    file.anchor_paths(base);
    file.into_run_config(overrides)
}

/// Reads the JSON document at `path` and applies `key=value` settings.
pub fn read_document(path: &Path, settings: &[(String, String)]) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut doc: Value = serde_json::from_str(&text)?;
    for (key, value) in settings {
        set_key(&mut doc, key, value)?;
    }
    Ok(doc)
}

/// Loads, applies defaults and settings, and checks admissibility.
///
/// Relation (charge balance) and positivity failures always reject;
/// point-of-zero-charge failures reject unless `overrides.unsafe_pzc`.
pub fn load_config(
    path: &Path,
    settings: &[(String, String)],
    overrides: Overrides,
) -> Result<RunConfig> {
    let doc = read_document(path, settings)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let cfg = parse_config(doc, base, overrides)?;
    admit(&cfg)?;
    Ok(cfg)
}

pub(crate) fn admit(cfg: &RunConfig) -> Result<()> {
    let report = check_admissibility(&cfg.params)?;
    if !(report.passed || (cfg.overrides.unsafe_pzc && report.passed_ignoring_pzc())) {
        return Err(Error::Inadmissible(Box::new(report)));
    }
    cfg.validate()
}

/// Serializes a configuration in the file schema.
pub fn to_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(&ConfigFile::from_run_config(cfg))
        .expect("configuration serializes")
}
