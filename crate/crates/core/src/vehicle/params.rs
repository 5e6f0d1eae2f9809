#![allow(non_snake_case)]

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which strip-velocity each cross-flow moment integral is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CrossflowPairing {
    /// Pitch moment from the heave strip flow, yaw moment from the sway strip flow.
    #[default]
    Standard,
    /// Pitch moment from the sway strip flow, yaw moment from the heave strip flow.
    Swapped,
}

/// Piecewise-linear coefficient curve, clamped at the table ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffTable {
    /// Angle of attack breakpoints (rad), strictly increasing.
    pub alpha: Vec<f64>,
    pub value: Vec<f64>,
}

impl CoeffTable {
    pub fn eval(&self, alpha: f64) -> f64 {
        let xs = &self.alpha;
        let ys = &self.value;
        let n = xs.len();
        if alpha <= xs[0] {
            return ys[0];
        }
        if alpha >= xs[n - 1] {
            return ys[n - 1];
        }
        // first breakpoint strictly greater than alpha
        let hi = xs.partition_point(|&x| x <= alpha);
        let lo = hi - 1;
        let w = (alpha - xs[lo]) / (xs[hi] - xs[lo]);
        ys[lo] + w * (ys[hi] - ys[lo])
    }

    fn validate(&self, field: &'static str) -> Result<()> {
        if self.alpha.len() < 2 || self.alpha.len() != self.value.len() {
            return Err(Error::param(
                field,
                "table needs at least two breakpoints and matching value count",
            ));
        }
        if self.alpha.iter().chain(&self.value).any(|v| !v.is_finite()) {
            return Err(Error::param(field, "table entries must be finite"));
        }
        if self.alpha.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(field, "alpha breakpoints must be strictly increasing"));
        }
        Ok(())
    }
}

/// Mass, geometry, hydrodynamic and actuator coefficients of the vehicle.
///
/// Keys in the JSON file mirror the usual symbol names; unknown keys are
/// rejected. Units are SI with angles in radians and propeller speed in rpm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    pub m: f64,
    #[serde(rename = "L_AUV")]
    pub length: f64,
    #[serde(rename = "D_AUV")]
    pub diameter: f64,
    pub rho: f64,
    pub g0: f64,
    pub r_bG: [f64; 3],
    pub r44: f64,
    pub T1: f64,
    pub T2: f64,
    pub T3: f64,
    pub T4: f64,
    pub T5: f64,
    pub T6: f64,
    pub A_r: f64,
    pub A_s: f64,
    pub C_L_delta_r: f64,
    pub C_L_delta_s: f64,
    pub x_r: f64,
    pub x_s: f64,
    pub alpha_X: f64,
    pub beta_X: f64,
    pub alpha_K: f64,
    pub beta_K: f64,
    pub S: f64,
    pub C_d_2D: f64,
    pub C_L: CoeffTable,
    pub C_D: CoeffTable,
    pub delta_max: f64,
    pub n_max: f64,
    #[serde(default)]
    pub crossflow_pairing: CrossflowPairing,
    /// Adds hull lift moments that cancel the pitch and yaw Munk moments of
    /// the added-mass Coriolis matrix.
    #[serde(default = "default_true")]
    pub munk_cancellation: bool,
}

fn default_true() -> bool {
    true
}

const REMUS100_JSON: &str = include_str!("../../../../params/remus100.json");

impl VehicleParams {
    /// The shipped REMUS-100 parameter set.
    pub fn remus100() -> Self {
        Self::from_json(REMUS100_JSON).expect("bundled remus100.json is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: VehicleParams = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "vehicle parameters".into(),
            source,
        })?;
        p.validate()?;
        Ok(p)
    }

    /// Canonical pretty-printed JSON (field order fixed by the struct).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("params serialize");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let finite: [(&'static str, f64); 26] = [
            ("m", self.m),
            ("L_AUV", self.length),
            ("D_AUV", self.diameter),
            ("rho", self.rho),
            ("g0", self.g0),
            ("r44", self.r44),
            ("T1", self.T1),
            ("T2", self.T2),
            ("T3", self.T3),
            ("T4", self.T4),
            ("T5", self.T5),
            ("T6", self.T6),
            ("A_r", self.A_r),
            ("A_s", self.A_s),
            ("C_L_delta_r", self.C_L_delta_r),
            ("C_L_delta_s", self.C_L_delta_s),
            ("x_r", self.x_r),
            ("x_s", self.x_s),
            ("alpha_X", self.alpha_X),
            ("beta_X", self.beta_X),
            ("alpha_K", self.alpha_K),
            ("beta_K", self.beta_K),
            ("S", self.S),
            ("C_d_2D", self.C_d_2D),
            ("delta_max", self.delta_max),
            ("n_max", self.n_max),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(field, "must be finite"));
            }
        }
        if self.r_bG.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("r_bG", "must be finite"));
        }
        if self.m <= 0.0 {
            return Err(Error::param("m", "mass must be positive"));
        }
        if self.diameter <= 0.0 {
            return Err(Error::param("D_AUV", "diameter must be positive"));
        }
        if self.length <= self.diameter {
            return Err(Error::param("L_AUV", "length must exceed diameter"));
        }
        if self.rho <= 0.0 {
            return Err(Error::param("rho", "density must be positive"));
        }
        for (field, t) in [
            ("T1", self.T1),
            ("T2", self.T2),
            ("T3", self.T3),
            ("T4", self.T4),
            ("T5", self.T5),
            ("T6", self.T6),
        ] {
            if t <= 0.0 {
                return Err(Error::param(field, "damping time constant must be positive"));
            }
        }
        if self.delta_max <= 0.0 {
            return Err(Error::param("delta_max", "fin limit must be positive"));
        }
        self.C_L.validate("C_L")?;
        self.C_D.validate("C_D")?;
        Ok(())
    }
}
