//! Run configuration: one JSON document, optionally patched by `--set`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::PathBuf;

use wgqed::spin_model::{EvolveMethod, Solver};
use wgqed::state_transfer::default_duration;
use wgqed::{ChainGeometry, PhaseMode, PhysicalParams, Site};

use crate::error::{CliError, CliResult};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Cavity,
    Dynamics,
    Modes,
    Transfer,
    Sweep,
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Cavity => "cavity",
            Command::Dynamics => "dynamics",
            Command::Modes => "modes",
            Command::Transfer => "transfer",
            Command::Sweep => "sweep",
            Command::Figures => "figures",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    Mirror {
        n_m: usize,
        #[serde(default = "default_d_m")]
        d_m: f64,
    },
    Cavity {
        n_m_per_side: usize,
        #[serde(default = "default_d_m")]
        d_m: f64,
        #[serde(default = "default_d_i")]
        d_i: f64,
        /// Impurity resonance shift from ω_A in rate units.
        #[serde(default)]
        impurity_offset: f64,
    },
    TwoImpurity {
        n_m_outer: usize,
        #[serde(default)]
        gap_sites: usize,
    },
    Sites {
        sites: Vec<Site>,
    },
}

fn default_d_m() -> f64 {
    wgqed::geometry::MIRROR_SPACING
}

fn default_d_i() -> f64 {
    wgqed::geometry::IMPURITY_SPACING
}

impl GeometrySpec {
    pub fn build(&self) -> CliResult<ChainGeometry> {
        Ok(match self {
            GeometrySpec::Mirror { n_m, d_m } => ChainGeometry::build_mirror_chain(*n_m, *d_m)?,
            GeometrySpec::Cavity { n_m_per_side, d_m, d_i, impurity_offset } => {
                let g = ChainGeometry::build_cavity_chain(*n_m_per_side, *d_m, *d_i)?;
                if *impurity_offset != 0.0 {
                    g.with_detuning_offset(*n_m_per_side, *impurity_offset)?
                } else {
                    g
                }
            }
            GeometrySpec::TwoImpurity { n_m_outer, gap_sites } => {
                ChainGeometry::build_two_impurity_chain(*n_m_outer, *gap_sites)?
            }
            GeometrySpec::Sites { sites } => ChainGeometry::new(sites.clone())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    TransferMatrix,
    SpinModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Drive {
    /// Guided probe incident from the left.
    #[default]
    Probe,
    /// The impurity driven from free space.
    Impurity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Impurity,
    Cavity,
    Radiant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TransferModelKind {
    #[default]
    Reduced,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSpec {
    #[serde(default)]
    pub model: TransferModelKind,
    /// Fixed pulse amplitude; optimized when absent.
    #[serde(default)]
    pub omega0: Option<f64>,
    /// Pulse length; `50/g` when absent.
    #[serde(default)]
    pub duration: Option<f64>,
    /// Ω₀ search bracket in units of g.
    #[serde(default = "default_bracket")]
    pub bracket: [f64; 2],
    #[serde(default = "default_schedule_points")]
    pub schedule_points: usize,
}

fn default_bracket() -> [f64; 2] {
    [0.01, 100.0]
}

fn default_schedule_points() -> usize {
    201
}

impl Default for TransferSpec {
    fn default() -> Self {
        Self {
            model: TransferModelKind::Reduced,
            omega0: None,
            duration: None,
            bracket: default_bracket(),
            schedule_points: default_schedule_points(),
        }
    }
}

impl TransferSpec {
    pub fn duration_for(&self, g: f64) -> f64 {
        self.duration.unwrap_or_else(|| default_duration(g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted config key, e.g. `params.gamma_1d` or `geometry.n_m`.
    pub key: String,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Scalar command evaluated at every grid point.
    pub target: Command,
    /// Axes of the Cartesian product; the last varies fastest.
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_command")]
    pub command: Command,
    #[serde(default = "default_params")]
    pub params: PhysicalParams,
    #[serde(default)]
    pub geometry: Option<GeometrySpec>,
    /// Dimensionless detunings δ.
    #[serde(default)]
    pub detuning: Option<GridSpec>,
    /// Detuning δ used by scalar targets such as the finesse.
    #[serde(default)]
    pub delta: f64,
    /// Times in units of 1/Γ′.
    #[serde(default)]
    pub time: Option<GridSpec>,
    #[serde(default)]
    pub phase_mode: PhaseMode,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub drive: Drive,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub evolve: EvolveMethod,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub transfer: TransferSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Figure pipelines to run; all of them when empty.
    #[serde(default)]
    pub figures: Vec<String>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_command() -> Command {
    Command::Spectrum
}

fn default_params() -> PhysicalParams {
    PhysicalParams::new(0.25, 1.0).expect("valid defaults")
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn from_value(v: Value) -> CliResult<Self> {
        let cfg: Self = serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.params.validate()?;
        if cfg.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn geometry(&self) -> CliResult<ChainGeometry> {
        self.geometry
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} needs a geometry", self.command.name())))?
            .build()
    }

    pub fn deltas(&self) -> CliResult<Vec<f64>> {
        self.detuning
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} needs a detuning grid", self.command.name())))?
            .resolve()
    }
}

/// Recursively overlays `patch` onto `base`; objects merge key by key and
/// anything else replaces.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Defaults, then the config document, then `key=value` overrides.
pub fn resolve(document: Value, overrides: &[String]) -> CliResult<ExperimentConfig> {
    let mut v = ExperimentConfig::default().to_value();
    merge(&mut v, document);
    apply_overrides(&mut v, overrides)?;
    ExperimentConfig::from_value(v)
}

/// Parses `value` as JSON, falling back to a plain string.
pub fn parse_value(value: &str) -> Value {
    serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()))
}

/// Sets a dotted key inside a JSON object, creating intermediate objects.
pub fn set_path(root: &mut Value, key: &str, value: Value) -> CliResult<()> {
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("malformed key '{key}'")));
    }
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let Value::Object(map) = node else {
            return Err(CliError::Config(format!("'{}' is not an object", parts[..i].join("."))));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last key")
}

/// Applies `key=value` overrides in order.
pub fn apply_overrides(root: &mut Value, overrides: &[String]) -> CliResult<()> {
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{item}' is not key=value")))?;
        set_path(root, key.trim(), parse_value(value.trim()))?;
    }
    Ok(())
}
