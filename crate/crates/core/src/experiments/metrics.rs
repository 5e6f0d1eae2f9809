use serde::{Deserialize, Serialize};

use crate::angles::ssa;
use crate::error::{Error, Result};
use crate::experiments::scenario::{ControllerKind, Mode};
use crate::sim::TrajectoryLog;

pub const METRICS_SCHEMA_VERSION: u32 = 1;

/// Root mean square of `signal - reference`. With `angle` set, differences
/// are wrapped to (-pi, pi] and the result is in degrees. Samples where the
/// reference is NaN are skipped; `None` when nothing is left.
pub fn rmse(signal: &[f64], reference: &[f64], angle: bool) -> Option<f64> {
    let errors = errors(signal, reference, angle);
    if errors.is_empty() {
        return None;
    }
    Some((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}

/// Largest absolute error, same conventions as [`rmse`].
pub fn max_error(signal: &[f64], reference: &[f64], angle: bool) -> Option<f64> {
    errors(signal, reference, angle).into_iter().map(f64::abs).reduce(f64::max)
}

fn errors(signal: &[f64], reference: &[f64], angle: bool) -> Vec<f64> {
    signal
        .iter()
        .zip(reference)
        .filter(|(_, r)| !r.is_nan())
        .map(|(s, r)| if angle { ssa(s - r).to_degrees() } else { s - r })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSummary {
    pub solves: usize,
    pub faults: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub scenario: String,
    pub controller: ControllerKind,
    pub mode: Mode,
    pub seed: u64,
    pub duration: f64,
    /// deg
    pub psi_rmse: Option<f64>,
    /// m
    pub z_rmse: Option<f64>,
    /// deg
    pub theta_rmse: Option<f64>,
    pub psi_max_error: Option<f64>,
    pub z_max_error: Option<f64>,
    pub theta_max_error: Option<f64>,
    /// Largest depth error over the last 30 s (m).
    pub z_final_max_error: Option<f64>,
    /// How far the vehicle went below the deepest reference (m).
    pub z_overshoot: Option<f64>,
    /// Closest approach to each waypoint (m), path mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoint_distances: Option<Vec<f64>>,
    pub solver: SolverSummary,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "metrics report".into(),
            source,
        })?;
        if r.schema_version != METRICS_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "metrics schema_version {} is not supported",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                context: path.display().to_string(),
                source,
            },
            other => other,
        })
    }
}

pub(crate) struct Channels {
    pub psi: Option<(Option<f64>, Option<f64>)>,
    pub z: Option<(Option<f64>, Option<f64>)>,
    pub theta: Option<(Option<f64>, Option<f64>)>,
    pub z_final: Option<f64>,
    pub z_overshoot: Option<f64>,
}

pub(crate) fn channel_metrics(log: &TrajectoryLog, with_depth: bool) -> Channels {
    let rows = log.rows();
    let col = |f: &dyn Fn(&crate::sim::LogRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let psi = col(&|r| r.state.eta[5]);
    let psi_d = col(&|r| r.refs.psi_d);
    let theta = col(&|r| r.state.eta[4]);
    let theta_d = col(&|r| r.refs.theta_d);
    let z = col(&|r| r.state.eta[2]);
    let z_d = col(&|r| r.refs.z_d);
    let pair = |s: &[f64], r: &[f64], a: bool| Some((rmse(s, r, a), max_error(s, r, a)));
    let t_end = rows.last().map_or(0.0, |r| r.t);
    let tail = rows.iter().position(|r| r.t >= t_end - 30.0).unwrap_or(0);
    Channels {
        psi: pair(&psi, &psi_d, true),
        theta: pair(&theta, &theta_d, true),
        z: if with_depth { pair(&z, &z_d, false) } else { None },
        z_final: if with_depth {
            max_error(&z[tail..], &z_d[tail..], false)
        } else {
            None
        },
        z_overshoot: if with_depth {
            let deepest = |v: &[f64]| v.iter().copied().filter(|x| !x.is_nan()).reduce(f64::max);
            deepest(&z).zip(deepest(&z_d)).map(|(a, b)| (a - b).max(0.0))
        } else {
            None
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    A,
    B,
    Tie,
    /// Missing in at least one report.
    Na,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelComparison {
    pub channel: &'static str,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub winner: Winner,
}

/// Per-channel RMSE comparison; lower wins.
pub fn compare(a: &MetricsReport, b: &MetricsReport) -> Vec<ChannelComparison> {
    [
        ("psi_rmse", a.psi_rmse, b.psi_rmse),
        ("z_rmse", a.z_rmse, b.z_rmse),
        ("theta_rmse", a.theta_rmse, b.theta_rmse),
    ]
    .into_iter()
    .map(|(channel, x, y)| ChannelComparison {
        channel,
        a: x,
        b: y,
        winner: match (x, y) {
            (Some(x), Some(y)) if x < y => Winner::A,
            (Some(x), Some(y)) if y < x => Winner::B,
            (Some(_), Some(_)) => Winner::Tie,
            _ => Winner::Na,
        },
    })
    .collect()
}

pub fn format_comparison(a_name: &str, b_name: &str, rows: &[ChannelComparison]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    let mut out = format!("{:<12} {:>14} {:>14}  winner\n", "channel", a_name, b_name);
    for r in rows {
        let w = match r.winner {
            Winner::A => a_name,
            Winner::B => b_name,
            Winner::Tie => "tie",
            Winner::Na => "n/a",
        };
        out.push_str(&format!("{:<12} {:>14} {:>14}  {w}\n", r.channel, fmt(r.a), fmt(r.b)));
    }
    out
}
