//! TOML run configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinguide_core::analysis::{linear_space, log_space};
use spinguide_core::presets::Numerics;
use spinguide_core::{
    FidelityConvention, Grid1D, GuideTrajectory, InitialState, PhysicalConstants, Scenario,
    SlopeLaw, SolverSettings,
};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interfere: Option<InterfereConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainCompareConfig>,
}

/// Geometry and numerics. Sweeps only read `constants`, `grid` and `solver`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub constants: PhysicalConstants,
    #[serde(default = "Grid1D::standard")]
    pub grid: Grid1D,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub t0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_f: Option<f64>,
    #[serde(default)]
    pub guides: Vec<GuideTrajectory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            grid: Grid1D::standard(),
            solver: SolverSettings::default(),
            t0: 0.0,
            t_f: None,
            guides: Vec::new(),
            initial: None,
        }
    }
}

impl ScenarioConfig {
    pub fn numerics(&self) -> Numerics {
        Numerics {
            constants: self.constants,
            grid: self.grid,
            solver: self.solver,
        }
    }

    pub fn build(&self) -> Result<Scenario, CliError> {
        let t_f = self
            .t_f
            .ok_or_else(|| CliError::Config("scenario.t_f is required for this command".into()))?;
        if self.guides.is_empty() {
            return Err(CliError::Config(
                "scenario.guides needs at least one [[scenario.guides]] entry".into(),
            ));
        }
        let initial = self
            .initial
            .clone()
            .unwrap_or(InitialState::Ground { guide: 0 });
        Ok(Scenario::new(
            self.constants,
            self.guides.clone(),
            self.grid,
            (self.t0, t_f),
            self.solver,
            initial,
        )?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(default)]
    pub convention: FidelityConvention,
    /// Skip writing the density map.
    #[serde(default)]
    pub skip_density: bool,
}

/// A parameter axis: explicit list, linear range or range in log10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Linear {
        start: f64,
        stop: f64,
        points: usize,
    },
    Log10 {
        log10_start: f64,
        log10_stop: f64,
        points: usize,
    },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Linear {
                start,
                stop,
                points,
            } => linear_space(*start, *stop, *points),
            Axis::Log10 {
                log10_start,
                log10_stop,
                points,
            } => log_space(*log10_start, *log10_stop, *points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Corner sharpness values (corner sweep).
    #[serde(default = "default_r")]
    pub r: Vec<f64>,
    /// Angle axis; defaults depend on the sweep kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Axis>,
    /// Corner run time.
    #[serde(default = "default_corner_t_f")]
    pub t_f: f64,
    #[serde(default)]
    pub slope: SlopeLaw,
    /// X-junction arm separation.
    #[serde(default = "default_x_l")]
    pub x_l: f64,
    /// Guide separations (coupling sweep).
    #[serde(default = "default_d")]
    pub d: Axis,
    /// Closed-form periods simulated per separation.
    #[serde(default = "default_periods")]
    pub periods: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            r: default_r(),
            theta: None,
            t_f: default_corner_t_f(),
            slope: SlopeLaw::default(),
            x_l: default_x_l(),
            d: default_d(),
            periods: default_periods(),
        }
    }
}

fn default_r() -> Vec<f64> {
    vec![0.0, 2.0]
}

fn default_corner_t_f() -> f64 {
    10.0
}

fn default_x_l() -> f64 {
    10.0
}

fn default_d() -> Axis {
    Axis::Linear {
        start: 1.0,
        stop: 3.0,
        points: 5,
    }
}

fn default_periods() -> f64 {
    2.5
}

pub fn default_corner_theta() -> Axis {
    Axis::Linear {
        start: 0.01,
        stop: 0.7,
        points: 50,
    }
}

pub fn default_xjunction_theta() -> Axis {
    Axis::Log10 {
        log10_start: -1.5,
        log10_stop: 2.2,
        points: 60,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfereConfig {
    #[serde(default = "default_interfere_theta")]
    pub theta: f64,
    #[serde(default = "default_x_l")]
    pub x_l: f64,
    #[serde(default = "default_alpha")]
    pub alpha: Axis,
}

impl Default for InterfereConfig {
    fn default() -> Self {
        Self {
            theta: default_interfere_theta(),
            x_l: default_x_l(),
            alpha: default_alpha(),
        }
    }
}

fn default_interfere_theta() -> f64 {
    10f64.powf(-0.7976)
}

fn default_alpha() -> Axis {
    Axis::Linear {
        start: -PI,
        stop: PI,
        points: 25,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainCompareConfig {
    #[serde(default = "default_spacings")]
    pub spacings: Vec<f64>,
}

impl Default for ChainCompareConfig {
    fn default() -> Self {
        Self {
            spacings: default_spacings(),
        }
    }
}

fn default_spacings() -> Vec<f64> {
    vec![0.4, 0.2, 0.1]
}

impl RunConfig {
    /// Parses a config file. A metadata file written by a previous run is
    /// accepted too; its embedded `[config]` table is used.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(format!("invalid TOML: {e}")))?;
        if let (Some(toml::Value::Table(inner)), true) =
            (table.get("config"), table.contains_key("config_sha256"))
        {
            return inner
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| CliError::Config(format!("embedded config: {e}")));
        }
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Canonical TOML text of the fully resolved configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_with_their_name() {
        let err = RunConfig::parse("[scenario]\nt_ff = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("t_ff"), "{err}");
        let err =
            RunConfig::parse("[[scenario.guides]]\nkind = \"stationary\"\nx0 = 0.0\nv = 1.0\n")
                .unwrap_err();
        assert!(err.to_string().contains('v'), "{err}");
    }

    #[test]
    fn bad_grid_is_a_config_error() {
        let err = RunConfig::parse("[scenario.grid]\nn_points = 4\n").unwrap_err();
        assert!(err.to_string().contains("at least"), "{err}");
    }

    #[test]
    fn defaults_fill_in_and_round_trip() {
        let cfg = RunConfig::parse(
            r#"
[scenario]
t_f = 10.0
[[scenario.guides]]
kind = "corner"
r = 2.0
theta = 0.15
t_f = 10.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.scenario.grid, Grid1D::standard());
        let again = RunConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.canonical(), cfg.canonical());
    }

    #[test]
    fn axes_parse_in_all_forms() {
        let cfg = RunConfig::parse(
            "[sweep]\ntheta = { log10_start = -1.0, log10_stop = 1.0, points = 3 }\nd = [1.0, 2.0]\n",
        )
        .unwrap();
        let sweep = cfg.sweep.unwrap();
        let th = sweep.theta.unwrap().values();
        assert!((th[1] - 1.0).abs() < 1e-12);
        assert_eq!(sweep.d.values(), vec![1.0, 2.0]);
        let lin =
            RunConfig::parse("[interfere]\nalpha = { start = 0.0, stop = 1.0, points = 5 }\n")
                .unwrap();
        assert_eq!(lin.interfere.unwrap().alpha.values().len(), 5);
    }
}
