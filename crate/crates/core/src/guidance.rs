//! Adaptive line-of-sight (ALOS) guidance for straight segments between 3-D
//! waypoints, a LOS observer, and the predictive variant (PALOS) that rolls
//! the guidance law over a horizon.

#![allow(non_snake_case)]

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::angles::{ssa, unwrap_near};
use crate::classic::LpFilter;
use crate::error::{Error, Result};
use crate::vehicle::{rotation_matrix, VehicleState};

/// Segment direction `wp_k1 - wp_k`.
pub fn path_tangent(wp_k: &Vector3<f64>, wp_k1: &Vector3<f64>) -> Result<Vector3<f64>> {
    let t = wp_k1 - wp_k;
    if t.norm() < 1e-9 {
        return Err(Error::Path(format!("coincident waypoints at {:?}", wp_k.as_slice())));
    }
    Ok(t)
}

/// Path heading and elevation. A vertical segment has heading 0 by the
/// `atan2(0, 0)` convention.
pub fn path_angles(t: &Vector3<f64>) -> (f64, f64) {
    let pi_h = t.y.atan2(t.x);
    let pi_v = (-t.z).atan2(t.x.hypot(t.y));
    (pi_h, pi_v)
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Along-track, cross-track and vertical-track errors of `p` relative to the
/// segment starting at `p_s`.
pub fn track_errors(p: &Vector3<f64>, p_s: &Vector3<f64>, pi_h: f64, pi_v: f64) -> Vector3<f64> {
    rot_y(pi_v).transpose() * rot_z(pi_h).transpose() * (p - p_s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPath {
    waypoints: Vec<Vector3<f64>>,
    k: usize,
    r_switch: f64,
}

impl WaypointPath {
    pub fn new(waypoints: Vec<Vector3<f64>>, r_switch: f64) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Path("a path needs at least two waypoints".into()));
        }
        for w in waypoints.windows(2) {
            path_tangent(&w[0], &w[1])?;
        }
        if !(r_switch >= 0.0) {
            return Err(Error::Path(format!("switch radius must be non-negative, got {r_switch}")));
        }
        Ok(Self {
            waypoints,
            k: 0,
            r_switch,
        })
    }

    pub fn from_triples(points: &[[f64; 3]], r_switch: f64) -> Result<Self> {
        Self::new(points.iter().map(|p| Vector3::from(*p)).collect(), r_switch)
    }

    pub fn waypoints(&self) -> &[Vector3<f64>] {
        &self.waypoints
    }

    /// Index of the segment start.
    pub fn active(&self) -> usize {
        self.k
    }

    pub fn r_switch(&self) -> f64 {
        self.r_switch
    }

    pub fn is_last(&self) -> bool {
        self.k + 2 >= self.waypoints.len()
    }

    pub fn segment(&self) -> (Vector3<f64>, Vector3<f64>) {
        (self.waypoints[self.k], self.waypoints[self.k + 1])
    }

    pub fn angles(&self) -> (f64, f64) {
        let (a, b) = self.segment();
        path_angles(&(b - a))
    }

    pub fn errors(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let (pi_h, pi_v) = self.angles();
        track_errors(p, &self.segment().0, pi_h, pi_v)
    }

    /// Advances while the along-track position is within `r_switch` of the
    /// segment end. The last segment is kept.
    pub fn update(&mut self, p: &Vector3<f64>) {
        while !self.is_last() {
            let (a, b) = self.segment();
            if self.errors(p).x > (b - a).norm() - self.r_switch {
                self.k += 1;
            } else {
                break;
            }
        }
    }
}

pub fn waypoint_switch(p: &Vector3<f64>, path: &WaypointPath) -> WaypointPath {
    let mut next = path.clone();
    next.update(p);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlosState {
    #[serde(default)]
    pub beta_hat: f64,
    #[serde(default)]
    pub alpha_hat: f64,
    pub gamma_h: f64,
    pub gamma_v: f64,
    pub Delta_h: f64,
    pub Delta_v: f64,
}

impl Default for AlosState {
    fn default() -> Self {
        Self {
            beta_hat: 0.0,
            alpha_hat: 0.0,
            gamma_h: 4e-3,
            gamma_v: 4e-3,
            Delta_h: 10.0,
            Delta_v: 10.0,
        }
    }
}

impl AlosState {
    pub fn validate(&self) -> Result<()> {
        if !(self.Delta_h > 0.0 && self.Delta_v > 0.0 && self.gamma_h > 0.0 && self.gamma_v > 0.0) {
            return Err(Error::Config(
                "look-ahead distances and adaptation gains must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Raw ALOS angles `(psi_d, theta_d)`, wrapped to (-pi, pi].
pub fn alos_commands(errors: &Vector3<f64>, alos: &AlosState, pi_h: f64, pi_v: f64) -> (f64, f64) {
    let psi = pi_h - alos.beta_hat - (errors.y / alos.Delta_h).atan();
    let theta = pi_v + alos.alpha_hat + (errors.z / alos.Delta_v).atan();
    (ssa(psi), ssa(theta))
}

/// Forward-Euler step of the crab-angle adaptation.
pub fn crab_update(alos: &AlosState, errors: &Vector3<f64>, h: f64) -> AlosState {
    let (y, z) = (errors.y, errors.z);
    let beta_dot = alos.gamma_h * y * alos.Delta_h / alos.Delta_h.hypot(y);
    let alpha_dot = alos.gamma_v * z * alos.Delta_v / alos.Delta_v.hypot(z);
    AlosState {
        beta_hat: alos.beta_hat + h * beta_dot,
        alpha_hat: alos.alpha_hat + h * alpha_dot,
        ..*alos
    }
}

/// Critically damped tracker of the raw LOS angles with rate outputs. The
/// internal angles are continuous; outputs are wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosObserver {
    psi: LpFilter,
    theta: LpFilter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosOutput {
    pub psi_d: f64,
    pub theta_d: f64,
    pub r_d: f64,
    pub q_d: f64,
}

impl LosObserver {
    pub fn new(omega_n: f64, psi: f64, theta: f64) -> Self {
        Self {
            psi: LpFilter::new(omega_n, psi),
            theta: LpFilter::new(omega_n, theta),
        }
    }

    /// Unwrapped heading estimate.
    pub fn psi_continuous(&self) -> f64 {
        self.psi.x
    }

    pub fn output(&self) -> LosOutput {
        LosOutput {
            psi_d: ssa(self.psi.x),
            theta_d: self.theta.x,
            r_d: self.psi.x_dot,
            q_d: self.theta.x_dot,
        }
    }

    pub fn step(&mut self, psi_raw: f64, theta_raw: f64, h: f64) -> LosOutput {
        self.psi.step(unwrap_near(psi_raw, self.psi.x), h);
        self.theta.step(theta_raw, h);
        self.output()
    }
}

pub fn los_observer_step(obs: &LosObserver, psi_raw: f64, theta_raw: f64, h: f64) -> (LosObserver, LosOutput) {
    let mut next = *obs;
    let out = next.step(psi_raw, theta_raw, h);
    (next, out)
}

/// Observer natural frequency used when none is configured (rad/s).
pub const DEFAULT_OBSERVER_OMEGA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput {
    pub los: LosOutput,
    pub errors: Vector3<f64>,
    pub pi_h: f64,
    pub pi_v: f64,
    pub segment: usize,
}

/// Live guidance state: path, crab estimates and observer.
#[derive(Debug, Clone, PartialEq)]
pub struct Guidance {
    pub path: WaypointPath,
    pub alos: AlosState,
    pub observer: LosObserver,
}

impl Guidance {
    pub fn new(path: WaypointPath, alos: AlosState, observer: LosObserver) -> Result<Self> {
        alos.validate()?;
        Ok(Self { path, alos, observer })
    }

    /// Switches waypoints, evaluates ALOS at `p`, filters the angles and
    /// adapts the crab estimates.
    pub fn step(&mut self, p: &Vector3<f64>, h: f64) -> GuidanceOutput {
        self.path.update(p);
        let (pi_h, pi_v) = self.path.angles();
        let errors = track_errors(p, &self.path.segment().0, pi_h, pi_v);
        let (psi_raw, theta_raw) = alos_commands(&errors, &self.alos, pi_h, pi_v);
        let los = self.observer.step(psi_raw, theta_raw, h);
        self.alos = crab_update(&self.alos, &errors, h);
        GuidanceOutput {
            los,
            errors,
            pi_h,
            pi_v,
            segment: self.path.active(),
        }
    }

    /// Rolls a copy of the guidance forward under perfect tracking and
    /// constant body velocity, `p <- p + h_eff R(phi, theta_d, psi_d) v`.
    /// Returns `t_fut` filtered commands for each axis; the first entries are
    /// what `step` would produce now. Heading is propagated with step `h`,
    /// pitch with `r_f h`. The heading sequence is unwrapped so consecutive
    /// entries differ by less than pi.
    pub fn predict(&self, state: &VehicleState, t_fut: usize, h: f64, r_f: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if t_fut == 0 || r_f == 0 {
            return Err(Error::Config("PALOS needs T_fut >= 1 and r_f >= 1".into()));
        }
        let psi = self.rollout(state, t_fut, h).0;
        let theta = if r_f == 1 {
            self.rollout(state, t_fut, h).1
        } else {
            self.rollout(state, t_fut, h * r_f as f64).1
        };
        Ok((psi, theta))
    }

    fn rollout(&self, state: &VehicleState, t_fut: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
        let mut g = self.clone();
        let phi = state.eta[3];
        let v = Vector3::new(state.nu[0], state.nu[1], state.nu[2]);
        let mut p = Vector3::new(state.eta[0], state.eta[1], state.eta[2]);
        let mut psi_seq = Vec::with_capacity(t_fut);
        let mut theta_seq = Vec::with_capacity(t_fut);
        for _ in 0..t_fut {
            let out = g.step(&p, h);
            let psi = g.observer.psi_continuous();
            psi_seq.push(match psi_seq.last() {
                Some(&prev) => unwrap_near(psi, prev),
                None => ssa(psi),
            });
            theta_seq.push(out.los.theta_d);
            p += rotation_matrix(phi, out.los.theta_d, out.los.psi_d) * v * h;
        }
        (psi_seq, theta_seq)
    }
}

pub fn palos_references(
    state: &VehicleState,
    guidance: &Guidance,
    t_fut: usize,
    h: f64,
    r_f: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    guidance.predict(state, t_fut, h, r_f)
}
