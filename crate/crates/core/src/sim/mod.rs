//! Fixed-step multi-rate simulation loop.

mod log;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vehicle::{ControlInput, OceanCurrent, StateVector, Vehicle, VehicleState};

pub use log::{LogRow, References, TrajectoryLog, CSV_HEADER};

/// Abort when the body velocity norm exceeds this.
pub const MAX_NU_NORM: f64 = 50.0;
/// Abort when |theta| exceeds this (rad, 85 deg).
pub const MAX_PITCH: f64 = 85.0 * std::f64::consts::PI / 180.0;

/// Standard deviations of the per-tick current perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct CurrentNoise {
    pub sigma_V: f64,
    pub sigma_beta: f64,
    pub sigma_W: f64,
}

impl Default for CurrentNoise {
    fn default() -> Self {
        Self {
            sigma_V: 0.02,
            sigma_beta: 2f64.to_radians(),
            sigma_W: 0.005,
        }
    }
}

impl CurrentNoise {
    pub const NONE: Self = Self {
        sigma_V: 0.0,
        sigma_beta: 0.0,
        sigma_W: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub t_end: f64,
    pub f_inner: f64,
    pub f_outer: f64,
    pub seed: u64,
    #[serde(default)]
    pub current: OceanCurrent,
    #[serde(default)]
    pub current_noise: CurrentNoise,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            f_inner: 20.0,
            f_outer: 2.0,
            seed: 0,
            current: OceanCurrent::default(),
            current_noise: CurrentNoise::default(),
        }
    }
}

impl SimConfig {
    /// Base step `1 / f_inner`.
    pub fn h(&self) -> f64 {
        1.0 / self.f_inner
    }

    /// Integer ratio `f_inner / f_outer`.
    pub fn rate_ratio(&self) -> usize {
        (self.f_inner / self.f_outer).round() as usize
    }

    pub fn ticks(&self) -> usize {
        (self.t_end * self.f_inner).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_inner > 0.0 && self.f_outer > 0.0) {
            return Err(Error::Config("loop frequencies must be positive".into()));
        }
        let ratio = self.f_inner / self.f_outer;
        if ratio < 1.0 || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "f_inner / f_outer must be an integer >= 1, got {ratio}"
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config("t_end must be finite and non-negative".into()));
        }
        let n = self.current_noise;
        if self.current.V_c < 0.0 || n.sigma_V < 0.0 || n.sigma_beta < 0.0 || n.sigma_W < 0.0 {
            return Err(Error::Config(
                "current speed and perturbation deviations must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Nominal current with independent zero-mean Gaussian perturbations on each
/// component; the speed is clamped at zero.
pub fn perturb_current(nominal: &OceanCurrent, noise: &CurrentNoise, rng: &mut ChaCha8Rng) -> OceanCurrent {
    let mut draw = |sigma: f64| {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    };
    let dv = draw(noise.sigma_V);
    let db = draw(noise.sigma_beta);
    let dw = draw(noise.sigma_W);
    OceanCurrent {
        V_c: (nominal.V_c + dv).max(0.0),
        beta_c: nominal.beta_c + db,
        W_c: nominal.W_c + dw,
    }
}

pub fn current_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One classical RK4 step with the input and current held over the step.
/// The input is saturated first. `t` only labels a divergence error.
pub fn integrate_step(
    vehicle: &Vehicle,
    state: &VehicleState,
    ctrl: &ControlInput,
    current: &OceanCurrent,
    h: f64,
    t: f64,
) -> Result<VehicleState> {
    let ctrl = ctrl.saturate(vehicle.params());
    let f = |x: &StateVector| {
        vehicle
            .derivative(&VehicleState::from_vector(x), &ctrl, current)
            .map_err(|e| match e {
                Error::Gimbal { theta } => Error::Diverged {
                    t,
                    reason: format!("pitch {theta:.3} rad reached the gimbal singularity"),
                },
                other => other,
            })
    };
    let x0 = state.to_vector();
    let k1 = f(&x0)?;
    let k2 = f(&(x0 + k1 * (h / 2.0)))?;
    let k3 = f(&(x0 + k2 * (h / 2.0)))?;
    let k4 = f(&(x0 + k3 * h))?;
    let x1 = x0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    let next = VehicleState::from_vector(&x1);
    if !next.is_finite() {
        return Err(Error::Diverged {
            t,
            reason: "non-finite state derivative".into(),
        });
    }
    Ok(next)
}

/// Divergence guard on the body velocity norm and the pitch angle.
pub fn check_guard(state: &VehicleState, t: f64) -> Result<()> {
    let speed = state.nu.norm();
    if speed > MAX_NU_NORM {
        return Err(Error::Diverged {
            t,
            reason: format!("|nu| = {speed:.2} exceeds {MAX_NU_NORM}"),
        });
    }
    let theta = state.eta[4];
    if theta.abs() > MAX_PITCH {
        return Err(Error::Diverged {
            t,
            reason: format!("|theta| = {:.1} deg exceeds 85 deg", theta.to_degrees()),
        });
    }
    Ok(())
}

/// Output of a controller at one inner tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub ctrl: ControlInput,
    pub refs: References,
    /// Set when a solver failed and an earlier input was held.
    pub fault: bool,
}

/// A closed-loop controller driven by the simulation loop.
pub trait Autopilot {
    /// Runs on ticks where `k % r_f == 0`, before `inner` of the same tick.
    fn outer(&mut self, _k: usize, _t: f64, _state: &VehicleState) -> Result<()> {
        Ok(())
    }

    /// Runs on every inner tick.
    fn inner(&mut self, k: usize, t: f64, state: &VehicleState) -> Result<Command>;
}

/// Fixed open-loop input, mostly for tests.
#[derive(Debug, Clone, Copy)]
pub struct OpenLoop(pub ControlInput);

impl Autopilot for OpenLoop {
    fn inner(&mut self, _k: usize, _t: f64, _state: &VehicleState) -> Result<Command> {
        Ok(Command {
            ctrl: self.0,
            refs: References::default(),
            fault: false,
        })
    }
}

/// Result of [`run`]: the log up to the last completed tick, and the error
/// that stopped the run early, if any.
#[derive(Debug)]
pub struct SimOutcome {
    pub log: TrajectoryLog,
    pub error: Option<Error>,
}

impl SimOutcome {
    pub fn into_result(self) -> Result<TrajectoryLog> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.log),
        }
    }
}

/// Runs the closed loop from `initial` for `config.t_end` seconds, logging
/// every inner tick including `t = 0` and `t = t_end`.
pub fn run(
    vehicle: &Vehicle,
    config: &SimConfig,
    initial: VehicleState,
    autopilot: &mut dyn Autopilot,
) -> SimOutcome {
    let mut log = TrajectoryLog::default();
    if let Err(e) = config.validate() {
        return SimOutcome { log, error: Some(e) };
    }
    let h = config.h();
    let r_f = config.rate_ratio();
    let n = config.ticks();
    let mut rng = current_rng(config.seed);
    let mut state = initial;
    for k in 0..=n {
        let t = k as f64 * h;
        let step = (|| -> Result<LogRow> {
            if k % r_f == 0 {
                autopilot.outer(k, t, &state)?;
            }
            let cmd = autopilot.inner(k, t, &state)?;
            Ok(LogRow {
                t,
                state,
                ctrl: cmd.ctrl.saturate(vehicle.params()),
                refs: cmd.refs,
                fault: cmd.fault,
            })
        })();
        let row = match step {
            Ok(r) => r,
            Err(e) => return SimOutcome { log, error: Some(e) },
        };
        log.push(row);
        if k == n {
            break;
        }
        let current = perturb_current(&config.current, &config.current_noise, &mut rng);
        match integrate_step(vehicle, &state, &row.ctrl, &current, h, t)
            .and_then(|s| check_guard(&s, t + h).map(|_| s))
        {
            Ok(s) => state = s,
            Err(e) => return SimOutcome { log, error: Some(e) },
        }
    }
    SimOutcome { log, error: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector6;

    fn simulate(h: f64, t_end: f64, ctrl: ControlInput) -> VehicleState {
        let v = Vehicle::remus100();
        let mut s = VehicleState::at_surge(1.5);
        let n = (t_end / h).round() as usize;
        for k in 0..n {
            s = integrate_step(&v, &s, &ctrl, &OceanCurrent::default(), h, k as f64 * h).unwrap();
        }
        s
    }

    #[test]
    fn level_trim_at_rest_stays() {
        let v = Vehicle::remus100();
        let s0 = VehicleState::default();
        let s1 = integrate_step(&v, &s0, &ControlInput::default(), &OceanCurrent::default(), 0.05, 0.0).unwrap();
        assert!((s1.to_vector() - s0.to_vector()).norm() < 1e-12);
    }

    #[test]
    fn rk4_fourth_order() {
        // nose-up stern plane keeps the angle of attack inside one segment of
        // the piecewise-linear lift/drag tables, so the flow is smooth
        let ctrl = ControlInput::new(-0.1, 0.1, 1000.0);
        let reference = simulate(0.1 / 8.0, 10.0, ctrl).to_vector();
        let e1 = (simulate(0.1, 10.0, ctrl).to_vector() - reference).norm();
        let e2 = (simulate(0.05, 10.0, ctrl).to_vector() - reference).norm();
        let order = (e1 / e2).log2();
        assert!((3.7..=4.3).contains(&order), "order {order}");
    }

    #[test]
    fn yaw_rate_kinematics() {
        let v = Vehicle::remus100();
        let mut s = VehicleState::default();
        s.nu[5] = 0.1;
        let x = s.to_vector();
        let d = v
            .derivative(&s, &ControlInput::default(), &OceanCurrent::default())
            .unwrap();
        assert_eq!(d[5], 0.1);
        assert_eq!(x[5], 0.0);
    }

    #[test]
    fn zero_noise_keeps_current() {
        let mut rng = current_rng(1);
        let c = OceanCurrent::new(0.5, 2.0, 0.05);
        assert_eq!(perturb_current(&c, &CurrentNoise::NONE, &mut rng), c);
    }

    #[test]
    fn perturbation_mean_is_nominal() {
        let mut rng = current_rng(7);
        let c = OceanCurrent::new(0.5, 2.0, 0.05);
        let noise = CurrentNoise::default();
        let n = 100_000;
        let (mut sv, mut sb, mut sw) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let p = perturb_current(&c, &noise, &mut rng);
            sv += p.V_c;
            sb += p.beta_c;
            sw += p.W_c;
        }
        let nf = n as f64;
        let se = |s: f64| 3.0 * s / nf.sqrt();
        assert!((sv / nf - c.V_c).abs() < se(noise.sigma_V));
        assert!((sb / nf - c.beta_c).abs() < se(noise.sigma_beta));
        assert!((sw / nf - c.W_c).abs() < se(noise.sigma_W));
    }

    #[test]
    fn seeded_perturbations_repeat() {
        let c = OceanCurrent::new(0.5, 2.0, 0.05);
        let noise = CurrentNoise::default();
        let draw = |seed| {
            let mut rng = current_rng(seed);
            (0..50).map(|_| perturb_current(&c, &noise, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn zero_length_run_logs_initial_sample() {
        let v = Vehicle::remus100();
        let cfg = SimConfig {
            t_end: 0.0,
            ..SimConfig::default()
        };
        let out = run(&v, &cfg, VehicleState::at_surge(1.0), &mut OpenLoop(ControlInput::default()));
        assert!(out.error.is_none());
        assert_eq!(out.log.rows().len(), 1);
        assert_eq!(out.log.rows()[0].t, 0.0);
    }

    #[test]
    fn guard_trips() {
        let mut s = VehicleState::default();
        s.eta[4] = 86f64.to_radians();
        assert!(check_guard(&s, 1.0).is_err());
        let mut s = VehicleState::default();
        s.nu = Vector6::repeat(30.0);
        assert!(check_guard(&s, 1.0).is_err());
        assert!(check_guard(&VehicleState::at_surge(2.0), 0.0).is_ok());
    }

    #[test]
    fn config_rejects_fractional_ratio() {
        let cfg = SimConfig {
            f_outer: 3.0,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert_eq!(SimConfig::default().rate_ratio(), 10);
    }
}
