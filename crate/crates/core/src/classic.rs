//! Baseline PID autopilots and second-order reference filters.

#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};

use crate::angles::ssa;
use crate::error::{Error, Result};

/// Fin limit of the baseline autopilots (rad).
pub const FIN_LIMIT: f64 = 20.0 * std::f64::consts::PI / 180.0;
/// Pitch command limit of the depth loop (rad).
pub const PITCH_LIMIT: f64 = 30.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub Kp: f64,
    pub Ki: f64,
    pub Kd: f64,
}

impl PidGains {
    pub fn heading() -> Self {
        Self {
            Kp: 7.5,
            Ki: 0.75,
            Kd: 15.0,
        }
    }

    pub fn pitch() -> Self {
        Self {
            Kp: 5.0,
            Ki: 0.3,
            Kd: 2.0,
        }
    }

    /// Outer depth PI, rad of pitch per metre.
    pub fn depth() -> Self {
        Self {
            Kp: 0.1,
            Ki: 1e-3,
            Kd: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.Kp > 0.0) || !(self.Ki >= 0.0) || !(self.Kd >= 0.0) || !(self.Kp + self.Ki + self.Kd).is_finite() {
            return Err(Error::Config(format!(
                "PID gains need Kp > 0 and Ki, Kd >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Trapezoidal integrator of a control error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Integrator {
    pub value: f64,
    prev: Option<f64>,
}

impl Integrator {
    pub fn update(self, e: f64, h: f64) -> Self {
        let prev = self.prev.unwrap_or(e);
        Self {
            value: self.value + 0.5 * h * (prev + e),
            prev: Some(e),
        }
    }
}

/// Heading PID `delta_r = -Kp e - Kd r - Ki int(e)` with `e = ssa(psi - psi_d)`.
/// The integrator keeps accumulating while the rudder is saturated.
pub fn pid_heading(psi: f64, psi_d: f64, r: f64, integ: Integrator, gains: &PidGains, h: f64) -> (f64, Integrator) {
    let e = ssa(psi - psi_d);
    let integ = integ.update(e, h);
    let u = -gains.Kp * e - gains.Kd * r - gains.Ki * integ.value;
    (u.clamp(-FIN_LIMIT, FIN_LIMIT), integ)
}

/// Inner pitch PID. A positive stern-plane angle pitches the nose down, so
/// the command has the sign of the pitch error.
pub fn pid_pitch(theta: f64, theta_d: f64, q: f64, integ: Integrator, gains: &PidGains, h: f64) -> (f64, Integrator) {
    let e = theta - theta_d;
    let integ = integ.update(e, h);
    let u = gains.Kp * e + gains.Kd * q + gains.Ki * integ.value;
    (u.clamp(-FIN_LIMIT, FIN_LIMIT), integ)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DepthStates {
    pub depth: Integrator,
    pub pitch: Integrator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthGains {
    pub depth: PidGains,
    pub pitch: PidGains,
}

impl Default for DepthGains {
    fn default() -> Self {
        Self {
            depth: PidGains::depth(),
            pitch: PidGains::pitch(),
        }
    }
}

/// Outer PI from depth error `z - z_d` to a pitch command (clamped to
/// +-30 deg), then the inner pitch PID. Returns `(theta_d, delta_s)`.
pub fn cascaded_depth(
    z: f64,
    z_d: f64,
    theta: f64,
    q: f64,
    states: DepthStates,
    gains: &DepthGains,
    h: f64,
) -> (f64, f64, DepthStates) {
    let e_z = z - z_d;
    let depth = states.depth.update(e_z, h);
    let theta_d = (gains.depth.Kp * e_z + gains.depth.Ki * depth.value).clamp(-PITCH_LIMIT, PITCH_LIMIT);
    let (delta_s, pitch) = pid_pitch(theta, theta_d, q, states.pitch, &gains.pitch, h);
    (theta_d, delta_s, DepthStates { depth, pitch })
}

/// Critically damped second-order low-pass filter
/// `x'' = w^2 (ref - x) - 2 w x'`, discretized exactly for a reference held
/// over each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpFilter {
    pub omega_n: f64,
    pub x: f64,
    pub x_dot: f64,
}

impl LpFilter {
    pub fn new(omega_n: f64, initial: f64) -> Self {
        Self {
            omega_n,
            x: initial,
            x_dot: 0.0,
        }
    }

    /// Advances one step and returns the filtered value.
    pub fn step(&mut self, reference: f64, h: f64) -> f64 {
        let w = self.omega_n;
        let decay = (-w * h).exp();
        let e = self.x - reference;
        let v = self.x_dot;
        self.x = reference + decay * ((1.0 + w * h) * e + h * v);
        self.x_dot = decay * (-w * w * h * e + (1.0 - w * h) * v);
        self.x
    }

    /// The next `n` filter outputs for a held reference, leaving `self`
    /// untouched.
    pub fn predict(&self, reference: f64, n: usize, h: f64) -> Vec<f64> {
        let mut f = *self;
        (0..n).map(|_| f.step(reference, h)).collect()
    }
}

pub fn lp_filter_step(state: LpFilter, reference: f64, h: f64) -> (LpFilter, f64) {
    let mut s = state;
    let y = s.step(reference, h);
    (s, y)
}

pub fn predictive_lp_filter(state: &LpFilter, reference: f64, t_fut: usize, h: f64) -> Vec<f64> {
    state.predict(reference, t_fut, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::rad;

    #[test]
    fn heading_at_rest_is_zero() {
        let (u, _) = pid_heading(0.3, 0.3, 0.0, Integrator::default(), &PidGains::heading(), 0.05);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn heading_proportional_term() {
        let g = PidGains {
            Kp: 7.5,
            Ki: 0.0,
            Kd: 0.0,
        };
        let (u, _) = pid_heading(rad(1.0), 0.0, 0.0, Integrator::default(), &g, 0.05);
        assert!((u - rad(-7.5)).abs() < 1e-12);
    }

    #[test]
    fn heading_error_wraps() {
        let g = PidGains {
            Kp: 1.0,
            Ki: 0.0,
            Kd: 0.0,
        };
        let (u, _) = pid_heading(rad(359.0), rad(1.0), 0.0, Integrator::default(), &g, 0.05);
        assert!((u - rad(2.0)).abs() < 1e-12);
    }

    #[test]
    fn integral_of_constant_error() {
        let g = PidGains {
            Kp: 1e-9,
            Ki: 0.5,
            Kd: 0.0,
        };
        let (h, e) = (0.05, rad(2.0));
        let mut integ = Integrator::default();
        let mut u = 0.0;
        for _ in 0..40 {
            (u, integ) = pid_heading(e, 0.0, 0.0, integ, &g, h);
        }
        let expect = -0.5 * e * 40.0 * h;
        assert!((u + 1e-9 * e - expect).abs() <= h * 0.5 * e, "{u} vs {expect}");
    }

    #[test]
    fn integrator_winds_up_past_saturation() {
        let g = PidGains::heading();
        let mut integ = Integrator::default();
        let mut u = 0.0;
        for _ in 0..200 {
            (u, integ) = pid_heading(1.0, 0.0, 0.0, integ, &g, 0.05);
        }
        assert_eq!(u, -FIN_LIMIT);
        assert!((integ.value - 10.0).abs() < 1e-9);
    }

    #[test]
    fn depth_on_target_is_zero() {
        let (td, ds, _) = cascaded_depth(5.0, 5.0, 0.0, 0.0, DepthStates::default(), &DepthGains::default(), 0.05);
        assert_eq!((td, ds), (0.0, 0.0));
    }

    #[test]
    fn depth_proportional_pitch_command() {
        let mut g = DepthGains::default();
        g.depth.Ki = 0.0;
        let (td, _, _) = cascaded_depth(6.0, 5.0, 0.0, 0.0, DepthStates::default(), &g, 0.05);
        assert!((td - 0.1).abs() < 1e-12);
        let (td, _, _) = cascaded_depth(100.0, 0.0, 0.0, 0.0, DepthStates::default(), &g, 0.05);
        assert_eq!(td, PITCH_LIMIT);
    }

    #[test]
    fn stern_plane_saturates() {
        let (_, ds, _) = cascaded_depth(0.0, 0.0, 1.2, 0.0, DepthStates::default(), &DepthGains::default(), 0.05);
        assert_eq!(ds, FIN_LIMIT);
    }

    #[test]
    fn filter_reaches_reference_without_overshoot() {
        let mut f = LpFilter::new(0.5, 0.0);
        let h = 0.05;
        let mut prev = 0.0;
        // 5 time constants plus margin for the double pole.
        let steps = (20.0 / 0.5 / h) as usize;
        for _ in 0..steps {
            let y = f.step(1.0, h);
            assert!(y >= prev && y <= 1.0);
            prev = y;
        }
        assert!((prev - 1.0).abs() < 1e-3);
    }

    #[test]
    fn filter_matches_fine_euler() {
        let w = 0.7;
        let mut f = LpFilter::new(w, -0.4);
        f.step(1.3, 0.5);
        f.step(1.3, 0.5);
        let (mut x, mut v) = (-0.4, 0.0);
        let dt = 1e-6;
        for _ in 0..1_000_000 {
            let a = w * w * (1.3 - x) - 2.0 * w * v;
            x += dt * v;
            v += dt * a;
        }
        assert!((f.x - x).abs() < 1e-5 && (f.x_dot - v).abs() < 1e-5);
    }

    #[test]
    fn filter_zero_stays_zero() {
        let mut f = LpFilter::new(0.1, 0.0);
        for _ in 0..100 {
            assert_eq!(f.step(0.0, 0.05), 0.0);
        }
    }

    #[test]
    fn discrete_poles_inside_unit_circle() {
        for w in [0.05, 0.5, 5.0] {
            for h in [1e-3, 0.05, 0.5, 1.0] {
                let col = |x, v| {
                    let mut f = LpFilter { omega_n: w, x, x_dot: v };
                    f.step(0.0, h);
                    (f.x, f.x_dot)
                };
                let (a, c) = col(1.0, 0.0);
                let (b, d) = col(0.0, 1.0);
                let m = nalgebra::Matrix2::new(a, b, c, d);
                let ev = m.complex_eigenvalues();
                assert!(ev.iter().all(|l| l.norm() < 1.0), "w {w} h {h}");
                let mut f = LpFilter::new(w, 2.5);
                assert_eq!(f.step(2.5, h), 2.5);
            }
        }
    }

    #[test]
    fn prediction_is_pure() {
        let mut f = LpFilter::new(0.5, 0.2);
        f.step(1.0, 0.05);
        let before = f;
        let seq = predictive_lp_filter(&f, 1.0, 10, 0.05);
        assert_eq!(f, before);
        assert_eq!(seq.len(), 10);
        assert!(seq.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0));
        let (_, one) = lp_filter_step(f, 1.0, 0.05);
        assert_eq!(f.predict(1.0, 1, 0.05), vec![one]);
        let rest = LpFilter::new(0.5, 0.7);
        assert!(rest.predict(0.7, 5, 0.05).iter().all(|&y| y == 0.7));
    }
}
