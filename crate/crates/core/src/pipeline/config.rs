//! Experiment configuration files (TOML).
//!
//! ```toml
//! [scenario]            # any subset; missing keys keep the reference values
//! source = [0.0, 0.0]
//! destination = [2.0, 0.0]
//! start = [0.0, 1.0]
//! end = [2.0, -1.0]
//! altitude = 0.3
//! max_step = 0.2
//! num_slots = 50
//! source_power = 1.0
//! gamma0 = 1.0
//! gamma = 0.01
//! noise_power = 1.0
//! rel_noise = 2.0
//! log_base = 2.0
//!
//! [experiment]
//! protocols = ["af", "df"]
//! strategies = ["optimal", "greedy", "static"]
//! init = "semicircle"          # straight | semicircle | both
//! arc_side = "toward-source"   # toward-source | away-from-source
//! hover = [0.0, 1.0]
//! seed = 0
//! output_dir = "out"
//!
//! [sweep]                      # at most one axis
//! source_power = [0.5, 1, 2]
//! # altitude = [0.2, 0.3, 0.5]
//!
//! [solver]
//! outer_tol = 1e-3
//! max_outer = 50
//! trajectory_tol = 1e-3
//! max_trajectory_iter = 200
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::baselines::{ArcSide, Strategy};
use crate::error::{Error, Result};
use crate::model::{Protocol, Scenario, ScenarioParams};
use crate::scalar::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitKind {
    Straight,
    Semicircle,
}

impl InitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InitKind::Straight => "straight",
            InitKind::Semicircle => "semicircle",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parses `straight`, `semicircle` or `both`.
pub fn parse_inits(s: &str) -> Result<Vec<InitKind>> {
    match s.to_ascii_lowercase().as_str() {
        "straight" | "straight-line" => Ok(vec![InitKind::Straight]),
        "semicircle" | "semi-circle" => Ok(vec![InitKind::Semicircle]),
        "both" => Ok(vec![InitKind::Straight, InitKind::Semicircle]),
        other => Err(Error::Config(format!("unknown init `{other}` (expected straight|semicircle|both)"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    SourcePower,
    Altitude,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::SourcePower => "source_power",
            SweepAxis::Altitude => "altitude",
        }
    }

    /// Current value of the swept parameter.
    pub fn get(self, p: &ScenarioParams<f64>) -> f64 {
        match self {
            SweepAxis::SourcePower => p.source_power,
            SweepAxis::Altitude => p.altitude,
        }
    }

    pub fn set(self, p: &mut ScenarioParams<f64>, v: f64) {
        match self {
            SweepAxis::SourcePower => p.source_power = v,
            SweepAxis::Altitude => p.altitude = v,
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ps" | "source_power" | "source-power" => Ok(SweepAxis::SourcePower),
            "altitude" | "h" => Ok(SweepAxis::Altitude),
            other => Err(Error::Config(format!("unknown sweep axis `{other}` (expected ps|altitude)"))),
        }
    }
}

/// Swept parameter and its values. No values means one run at the scenario value.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioParams<f64>,
    pub protocols: Vec<Protocol>,
    pub strategies: Vec<Strategy>,
    pub inits: Vec<InitKind>,
    pub arc_side: ArcSide,
    pub hover: Point<f64>,
    pub sweep: Sweep,
    pub outer_tol: f64,
    pub max_outer: usize,
    pub trajectory_tol: f64,
    pub max_trajectory_iter: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioParams::default(),
            protocols: Protocol::ALL.to_vec(),
            strategies: Strategy::ALL.to_vec(),
            inits: vec![InitKind::Semicircle],
            arc_side: ArcSide::TowardSource,
            hover: crate::baselines::default_hover(),
            sweep: Sweep { axis: SweepAxis::SourcePower, values: Vec::new() },
            outer_tol: 1e-3,
            max_outer: 50,
            trajectory_tol: 1e-3,
            max_trajectory_iter: 200,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Scenario values of every sweep cell, in order.
    pub fn sweep_points(&self) -> Vec<f64> {
        if self.sweep.values.is_empty() {
            vec![self.sweep.axis.get(&self.scenario)]
        } else {
            self.sweep.values.clone()
        }
    }

    /// Scenario of one sweep cell.
    pub fn scenario_at(&self, value: f64) -> Result<Scenario<f64>> {
        let mut p = self.scenario.clone();
        self.sweep.axis.set(&mut p, value);
        p.build()
    }

    /// Checks every invariant, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        self.scenario.clone().build()?;
        for &v in &self.sweep.values {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("sweep value {v} for {} must be > 0", self.sweep.axis.as_str())));
            }
            self.scenario_at(v)?;
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategies must not be empty".into()));
        }
        if self.protocols.is_empty() {
            return Err(Error::Config("protocols must not be empty".into()));
        }
        if self.inits.is_empty() {
            return Err(Error::Config("init must name at least one trajectory".into()));
        }
        if !(self.outer_tol.is_finite() && self.outer_tol >= 0.0) {
            return Err(Error::Config(format!("outer_tol must be >= 0 (got {})", self.outer_tol)));
        }
        if !(self.trajectory_tol.is_finite() && self.trajectory_tol >= 0.0) {
            return Err(Error::Config(format!("trajectory_tol must be >= 0 (got {})", self.trajectory_tol)));
        }
        if self.max_outer == 0 || self.max_trajectory_iter == 0 {
            return Err(Error::Config("max_outer and max_trajectory_iter must be >= 1".into()));
        }
        if !(self.hover[0].is_finite() && self.hover[1].is_finite()) {
            return Err(Error::Config("hover must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    scenario: RawScenario,
    #[serde(default)]
    experiment: RawExperiment,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    source: Option<[f64; 2]>,
    destination: Option<[f64; 2]>,
    start: Option<[f64; 2]>,
    end: Option<[f64; 2]>,
    altitude: Option<f64>,
    max_step: Option<f64>,
    num_slots: Option<usize>,
    source_power: Option<f64>,
    gamma0: Option<f64>,
    gamma: Option<f64>,
    noise_power: Option<f64>,
    rel_noise: Option<f64>,
    log_base: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    protocols: Option<Vec<String>>,
    strategies: Option<Vec<String>>,
    init: Option<String>,
    arc_side: Option<String>,
    hover: Option<[f64; 2]>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    source_power: Option<Vec<f64>>,
    altitude: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    outer_tol: Option<f64>,
    max_outer: Option<usize>,
    trajectory_tol: Option<f64>,
    max_trajectory_iter: Option<usize>,
}

/// Parses config text; missing keys take the reference values.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut cfg = ExperimentConfig::default();

    let s = raw.scenario;
    let p = &mut cfg.scenario;
    macro_rules! take {
        ($($field:ident => $dst:ident),*) => {
            $(if let Some(v) = s.$field { p.$dst = v; })*
        };
    }
    take!(source => source, destination => destination, start => start, end => end,
          altitude => altitude, max_step => max_step, num_slots => num_slots,
          source_power => source_power, gamma0 => gamma0, gamma => gamma,
          noise_power => noise_power, rel_noise => rel_noise, log_base => log_base);

    let e = raw.experiment;
    if let Some(list) = e.protocols {
        cfg.protocols = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(list) = e.strategies {
        cfg.strategies = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(init) = e.init {
        cfg.inits = parse_inits(&init)?;
    }
    if let Some(side) = e.arc_side {
        cfg.arc_side = parse_arc_side(&side)?;
    }
    if let Some(h) = e.hover {
        cfg.hover = h;
    }
    if let Some(seed) = e.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = e.output_dir {
        cfg.output_dir = dir;
    }

    cfg.sweep = match (raw.sweep.source_power, raw.sweep.altitude) {
        (Some(_), Some(_)) => return Err(Error::Config("sweep: give either source_power or altitude, not both".into())),
        (Some(v), None) => Sweep { axis: SweepAxis::SourcePower, values: v },
        (None, Some(v)) => Sweep { axis: SweepAxis::Altitude, values: v },
        (None, None) => Sweep { axis: SweepAxis::SourcePower, values: Vec::new() },
    };

    let sv = raw.solver;
    if let Some(v) = sv.outer_tol {
        cfg.outer_tol = v;
    }
    if let Some(v) = sv.max_outer {
        cfg.max_outer = v;
    }
    if let Some(v) = sv.trajectory_tol {
        cfg.trajectory_tol = v;
    }
    if let Some(v) = sv.max_trajectory_iter {
        cfg.max_trajectory_iter = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_arc_side(s: &str) -> Result<ArcSide> {
    match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "toward-source" => Ok(ArcSide::TowardSource),
        "away-from-source" => Ok(ArcSide::AwayFromSource),
        other => Err(Error::Config(format!("unknown arc_side `{other}` (expected toward-source|away-from-source)"))),
    }
}

/// Reads and parses a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference_config() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.sweep_points(), vec![1.0]);
    }

    #[test]
    fn sweep_values_accept_integers() {
        let cfg = parse_config_str("[sweep]\nsource_power = [0.5, 1, 2]\n").unwrap();
        assert_eq!(cfg.sweep.axis, SweepAxis::SourcePower);
        assert_eq!(cfg.sweep_points(), vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn negative_altitude_names_the_field() {
        let err = parse_config_str("[scenario]\naltitude = -0.3\n").unwrap_err().to_string();
        assert!(err.contains("altitude_H"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let err = parse_config_str("[scenario]\naltitud = 0.3\n").unwrap_err().to_string();
        assert!(err.contains("altitud") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn bad_sweep_value_is_rejected() {
        let err = parse_config_str("[sweep]\naltitude = [0.3, 0.0]\n").unwrap_err().to_string();
        assert!(err.contains("altitude"), "{err}");
        assert!(parse_config_str("[experiment]\nstrategies = []\n").is_err());
    }
}
