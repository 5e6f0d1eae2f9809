//! Scenario files. Heading and pitch values are in degrees, depths and
//! positions in metres, the current direction in radians.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cascade::CascadeConfig;
use crate::classic::{DepthGains, PidGains};
use crate::deepc::DeePCConfig;
use crate::error::{Error, Result};
use crate::excitation::{CollectionSetup, ExcitationConfig};
use crate::guidance::{AlosState, DEFAULT_OBSERVER_OMEGA};
use crate::sim::CurrentNoise;
use crate::vehicle::OceanCurrent;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Deepc,
    Pid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Setpoint,
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    pub amplitude: f64,
    /// s
    pub period: f64,
    /// Time the overlay starts (s).
    pub onset: f64,
}

impl Sinusoid {
    pub fn value(&self, t: f64) -> f64 {
        if t < self.onset {
            return 0.0;
        }
        self.amplitude * (std::f64::consts::TAU * (t - self.onset) / self.period).sin()
    }
}

/// A step from `initial` to `target` at `step_time`, smoothed by a
/// critically damped filter with natural frequency `omega_n`, with an
/// optional sinusoid added after the filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelReference {
    #[serde(default)]
    pub initial: f64,
    pub target: f64,
    pub step_time: f64,
    /// rad/s
    pub omega_n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sinusoid: Option<Sinusoid>,
}

impl ChannelReference {
    pub fn raw(&self, t: f64) -> f64 {
        if t >= self.step_time {
            self.target
        } else {
            self.initial
        }
    }

    pub fn overlay(&self, t: f64) -> f64 {
        self.sinusoid.map_or(0.0, |s| s.value(t))
    }

    fn validate(&self, name: &str) -> Result<()> {
        let finite = [self.initial, self.target, self.step_time].iter().all(|v| v.is_finite());
        if !finite || !(self.omega_n > 0.0) {
            return Err(Error::Config(format!("{name}: values must be finite and omega_n positive")));
        }
        if let Some(s) = self.sinusoid {
            if !(s.period > 0.0) || !s.amplitude.is_finite() || !s.onset.is_finite() {
                return Err(Error::Config(format!("{name}: sinusoid needs a positive period")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetpointPlan {
    /// deg
    pub heading: ChannelReference,
    /// m, positive down
    pub depth: ChannelReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathPlan {
    /// NED waypoints (m); the vehicle starts at the first one.
    pub waypoints: Vec<[f64; 3]>,
    pub r_switch: f64,
    #[serde(default)]
    pub alos: AlosState,
    #[serde(default = "default_observer_omega")]
    pub observer_omega: f64,
}

fn default_observer_omega() -> f64 {
    DEFAULT_OBSERVER_OMEGA
}

/// Where the DeePC data come from: a CSV with its sidecar, or a fresh
/// collection run when absent. Relative paths are resolved against the
/// scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSources {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeepcSection {
    #[serde(default = "DeePCConfig::heading")]
    pub heading: DeePCConfig,
    #[serde(default = "DeePCConfig::pitch")]
    pub pitch: DeePCConfig,
    #[serde(default = "DeePCConfig::depth")]
    pub depth: DeePCConfig,
    #[serde(default)]
    pub data: DataSources,
}

impl Default for DeepcSection {
    fn default() -> Self {
        Self {
            heading: DeePCConfig::heading(),
            pitch: DeePCConfig::pitch(),
            depth: DeePCConfig::depth(),
            data: DataSources::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidSection {
    #[serde(default = "PidGains::heading")]
    pub heading: PidGains,
    #[serde(default)]
    pub depth: DepthGains,
}

impl Default for PidSection {
    fn default() -> Self {
        Self {
            heading: PidGains::heading(),
            depth: DepthGains::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionSection {
    #[serde(default)]
    pub setup: CollectionSetup,
    #[serde(default = "ExcitationConfig::fin")]
    pub heading: ExcitationConfig,
    #[serde(default = "pitch_fin")]
    pub pitch: ExcitationConfig,
    #[serde(default = "ExcitationConfig::pitch_command")]
    pub depth: ExcitationConfig,
}

fn pitch_fin() -> ExcitationConfig {
    ExcitationConfig {
        seed: 3,
        ..ExcitationConfig::fin()
    }
}

impl Default for CollectionSection {
    fn default() -> Self {
        Self {
            setup: CollectionSetup::default(),
            heading: ExcitationConfig::fin(),
            pitch: pitch_fin(),
            depth: ExcitationConfig::pitch_command(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    /// Surge speed (m/s); the steady speed at `n_p` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default)]
    pub depth: f64,
    /// deg
    #[serde(default)]
    pub heading: f64,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self {
            u: None,
            depth: 0.0,
            heading: 0.0,
        }
    }
}

fn default_n_p() -> f64 {
    1000.0
}

fn no_noise() -> CurrentNoise {
    CurrentNoise::NONE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub controller: ControllerKind,
    pub mode: Mode,
    /// s
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    /// Propeller speed during the run (rpm).
    #[serde(default = "default_n_p")]
    pub n_p: f64,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub rates: CascadeConfig,
    #[serde(default)]
    pub current: OceanCurrent,
    #[serde(default = "no_noise")]
    pub current_noise: CurrentNoise,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setpoint: Option<SetpointPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathPlan>,
    #[serde(default)]
    pub deepc: DeepcSection,
    #[serde(default)]
    pub pid: PidSection,
    #[serde(default)]
    pub collection: CollectionSection,
}

impl Scenario {
    /// Parses and validates; errors name the offending field and position.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!("scenario field `{path}`: {inner}"))
        })?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a scenario and resolves its dataset paths against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut s = Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut s.deepc.data.heading, &mut s.deepc.data.pitch, &mut s.deepc.data.depth]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if s.controller == ControllerKind::Deepc {
            for p in [&s.deepc.data.heading, &s.deepc.data.pitch, &s.deepc.data.depth].into_iter().flatten() {
                if !p.exists() {
                    return Err(Error::Config(format!("dataset {} does not exist", p.display())));
                }
            }
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCENARIO_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::Config("duration must be finite and non-negative".into()));
        }
        if !(self.n_p >= 0.0) {
            return Err(Error::Config("n_p must be non-negative".into()));
        }
        self.rates.rate_ratio()?;
        match (self.mode, &self.setpoint, &self.path) {
            (Mode::Setpoint, Some(sp), None) => {
                sp.heading.validate("setpoint.heading")?;
                sp.depth.validate("setpoint.depth")?;
            }
            (Mode::Path, None, Some(p)) => {
                if p.waypoints.len() < 2 {
                    return Err(Error::Config("path needs at least two waypoints".into()));
                }
                if !(p.r_switch > 0.0) || !(p.observer_omega > 0.0) {
                    return Err(Error::Config("path: r_switch and observer_omega must be positive".into()));
                }
                p.alos.validate()?;
            }
            (Mode::Setpoint, _, _) => {
                return Err(Error::Config("setpoint mode needs a `setpoint` section and no `path`".into()))
            }
            (Mode::Path, _, _) => return Err(Error::Config("path mode needs a `path` section and no `setpoint`".into())),
        }
        for cfg in [&self.deepc.heading, &self.deepc.pitch, &self.deepc.depth] {
            cfg.validate()?;
        }
        self.pid.heading.validate()?;
        self.pid.depth.depth.validate()?;
        self.pid.depth.pitch.validate()?;
        Ok(())
    }
}
