//! Closed-loop autopilots wired from a scenario.

use nalgebra::{DVector, Vector3};

use crate::angles::{ssa, unwrap_near};
use crate::cascade::Cascade;
use crate::classic::{cascaded_depth, pid_heading, pid_pitch, DepthGains, DepthStates, Integrator, LpFilter, PidGains};
use crate::deepc::DeepcController;
use crate::error::Result;
use crate::experiments::metrics::SolverSummary;
use crate::experiments::scenario::ChannelReference;
use crate::guidance::Guidance;
use crate::sim::{Autopilot, Command, References};
use crate::vehicle::{ControlInput, VehicleState};

/// Live reference of one setpoint channel in SI units.
#[derive(Debug, Clone, Copy)]
pub struct RefPlan {
    channel: ChannelReference,
    /// Factor from scenario units to SI.
    unit: f64,
    filter: LpFilter,
}

impl RefPlan {
    pub fn new(channel: ChannelReference, unit: f64) -> Self {
        Self {
            channel,
            unit,
            filter: LpFilter::new(channel.omega_n, channel.initial * unit),
        }
    }

    /// Steps the filter to time `t` and returns the reference there.
    pub fn advance(&mut self, t: f64, h: f64) -> f64 {
        self.filter.step(self.channel.raw(t) * self.unit, h) + self.channel.overlay(t) * self.unit
    }

    /// References at `t + stride h, t + 2 stride h, ...` (`n` values), with
    /// the filter input held at its current value and the overlay known.
    pub fn predict(&self, t: f64, n: usize, stride: usize, h: f64) -> DVector<f64> {
        let f = self.filter.predict(self.channel.raw(t) * self.unit, n * stride, h);
        DVector::from_fn(n, |i, _| {
            let j = (i + 1) * stride;
            f[j - 1] + self.channel.overlay(t + j as f64 * h) * self.unit
        })
    }
}

/// Shifts a heading sequence by a multiple of 2 pi so that its first entry
/// is within pi of `psi`.
fn align_heading(r: &mut DVector<f64>, psi: f64) {
    let d = unwrap_near(r[0], psi) - r[0];
    r.add_scalar_mut(d);
}

fn summary(ctrls: &[&DeepcController]) -> SolverSummary {
    ctrls.iter().fold(SolverSummary::default(), |s, c| SolverSummary {
        solves: s.solves + c.solve_count(),
        faults: s.faults + c.fault_count(),
        iterations: s.iterations + c.total_iterations(),
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct HeadingTrack {
    psi: f64,
}

impl HeadingTrack {
    /// Continuous heading from the wrapped measurement.
    fn update(&mut self, k: usize, psi: f64) -> f64 {
        self.psi = if k == 0 { psi } else { unwrap_near(psi, self.psi) };
        self.psi
    }
}

/// Heading DeePC plus the cascaded depth DeePC.
pub struct DeepcSetpoint {
    heading: DeepcController,
    cascade: Cascade,
    psi_plan: RefPlan,
    z_plan: RefPlan,
    h: f64,
    n_p: f64,
    advanced: Option<usize>,
    psi_d: f64,
    z_d: f64,
    track: HeadingTrack,
    last_delta_r: f64,
}

impl DeepcSetpoint {
    pub fn new(heading: DeepcController, cascade: Cascade, psi_plan: RefPlan, z_plan: RefPlan, h: f64, n_p: f64) -> Self {
        Self {
            heading,
            cascade,
            psi_plan,
            z_plan,
            h,
            n_p,
            advanced: None,
            psi_d: 0.0,
            z_d: 0.0,
            track: HeadingTrack::default(),
            last_delta_r: 0.0,
        }
    }

    fn advance(&mut self, k: usize, t: f64) {
        if self.advanced != Some(k) {
            self.psi_d = self.psi_plan.advance(t, self.h);
            self.z_d = self.z_plan.advance(t, self.h);
            self.advanced = Some(k);
        }
    }

    pub fn solver_summary(&self) -> SolverSummary {
        summary(&[&self.heading, self.cascade.inner(), self.cascade.outer()])
    }
}

impl Autopilot for DeepcSetpoint {
    fn outer(&mut self, k: usize, t: f64, state: &VehicleState) -> Result<()> {
        self.advance(k, t);
        if k == 0 {
            self.cascade.reset(state.eta[4], state.eta[2]);
            return Ok(());
        }
        let n = self.cascade.outer().horizon();
        let z_ref = self.z_plan.predict(t, n, self.cascade.r_f(), self.h);
        self.cascade.outer_step(k, &z_ref)?;
        Ok(())
    }

    fn inner(&mut self, k: usize, t: f64, state: &VehicleState) -> Result<Command> {
        self.advance(k, t);
        let psi = self.track.update(k, state.eta[5]);
        if k == 0 {
            self.heading.fill_history(&[0.0], &[psi]);
        } else {
            self.heading.push(&[self.last_delta_r], &[psi]);
        }
        let mut r = self.psi_plan.predict(t, self.heading.horizon(), 1, self.h);
        align_heading(&mut r, psi);
        let out = self.heading.solve(&r, Some(&DVector::from_element(1, psi)));
        self.last_delta_r = out.u[0];

        let (theta, z) = (state.eta[4], state.eta[2]);
        self.cascade.record(k, theta, z);
        let (delta_s, pitch_fault) = self.cascade.inner_step(k, theta);
        Ok(Command {
            ctrl: ControlInput::new(delta_s, out.u[0], self.n_p),
            refs: References {
                psi_d: ssa(self.psi_d),
                theta_d: self.cascade.theta_d_at(k),
                z_d: self.z_d,
                ..References::default()
            },
            fault: out.fault || pitch_fault,
        })
    }
}

/// Heading PID and cascaded depth PI/PID, all at the inner rate.
pub struct PidSetpoint {
    heading_gains: PidGains,
    depth_gains: DepthGains,
    psi_plan: RefPlan,
    z_plan: RefPlan,
    h: f64,
    n_p: f64,
    heading_integ: Integrator,
    depth: DepthStates,
}

impl PidSetpoint {
    pub fn new(heading_gains: PidGains, depth_gains: DepthGains, psi_plan: RefPlan, z_plan: RefPlan, h: f64, n_p: f64) -> Self {
        Self {
            heading_gains,
            depth_gains,
            psi_plan,
            z_plan,
            h,
            n_p,
            heading_integ: Integrator::default(),
            depth: DepthStates::default(),
        }
    }
}

impl Autopilot for PidSetpoint {
    fn inner(&mut self, _k: usize, t: f64, state: &VehicleState) -> Result<Command> {
        let psi_d = self.psi_plan.advance(t, self.h);
        let z_d = self.z_plan.advance(t, self.h);
        let (delta_r, integ) = pid_heading(
            state.eta[5],
            psi_d,
            state.nu[5],
            self.heading_integ,
            &self.heading_gains,
            self.h,
        );
        self.heading_integ = integ;
        let (theta_d, delta_s, depth) = cascaded_depth(
            state.eta[2],
            z_d,
            state.eta[4],
            state.nu[4],
            self.depth,
            &self.depth_gains,
            self.h,
        );
        self.depth = depth;
        Ok(Command {
            ctrl: ControlInput::new(delta_s, delta_r, self.n_p),
            refs: References {
                psi_d: ssa(psi_d),
                theta_d,
                z_d,
                ..References::default()
            },
            fault: false,
        })
    }
}

fn position(state: &VehicleState) -> Vector3<f64> {
    Vector3::new(state.eta[0], state.eta[1], state.eta[2])
}

/// PALOS guidance with heading and pitch DeePC fed the predicted LOS
/// angles.
pub struct DeepcPath {
    heading: DeepcController,
    pitch: DeepcController,
    guidance: Guidance,
    h: f64,
    n_p: f64,
    track: HeadingTrack,
    last_delta_r: f64,
    last_delta_s: f64,
}

impl DeepcPath {
    pub fn new(heading: DeepcController, pitch: DeepcController, guidance: Guidance, h: f64, n_p: f64) -> Self {
        Self {
            heading,
            pitch,
            guidance,
            h,
            n_p,
            track: HeadingTrack::default(),
            last_delta_r: 0.0,
            last_delta_s: 0.0,
        }
    }

    pub fn solver_summary(&self) -> SolverSummary {
        summary(&[&self.heading, &self.pitch])
    }
}

impl Autopilot for DeepcPath {
    fn inner(&mut self, k: usize, _t: f64, state: &VehicleState) -> Result<Command> {
        let g = self.guidance.step(&position(state), self.h);
        let psi = self.track.update(k, state.eta[5]);
        let theta = state.eta[4];
        if k == 0 {
            self.heading.fill_history(&[0.0], &[psi]);
            self.pitch.fill_history(&[0.0], &[theta]);
        } else {
            self.heading.push(&[self.last_delta_r], &[psi]);
            self.pitch.push(&[self.last_delta_s], &[theta]);
        }
        let (n_psi, n_theta) = (self.heading.horizon(), self.pitch.horizon());
        let (psi_seq, theta_seq) = self.guidance.predict(state, n_psi.max(n_theta), self.h, 1)?;
        let mut r_psi = DVector::from_column_slice(&psi_seq[..n_psi]);
        align_heading(&mut r_psi, psi);
        let r_theta = DVector::from_column_slice(&theta_seq[..n_theta]);
        let yaw = self.heading.solve(&r_psi, Some(&DVector::from_element(1, psi)));
        let pitch = self.pitch.solve(&r_theta, None);
        self.last_delta_r = yaw.u[0];
        self.last_delta_s = pitch.u[0];
        Ok(Command {
            ctrl: ControlInput::new(pitch.u[0], yaw.u[0], self.n_p),
            refs: References {
                psi_d: g.los.psi_d,
                theta_d: g.los.theta_d,
                z_d: f64::NAN,
                beta_hat: self.guidance.alos.beta_hat,
                alpha_hat: self.guidance.alos.alpha_hat,
            },
            fault: yaw.fault || pitch.fault,
        })
    }
}

/// ALOS guidance with heading and pitch PID.
pub struct PidPath {
    heading_gains: PidGains,
    pitch_gains: PidGains,
    guidance: Guidance,
    h: f64,
    n_p: f64,
    heading_integ: Integrator,
    pitch_integ: Integrator,
}

impl PidPath {
    pub fn new(heading_gains: PidGains, pitch_gains: PidGains, guidance: Guidance, h: f64, n_p: f64) -> Self {
        Self {
            heading_gains,
            pitch_gains,
            guidance,
            h,
            n_p,
            heading_integ: Integrator::default(),
            pitch_integ: Integrator::default(),
        }
    }
}

impl Autopilot for PidPath {
    fn inner(&mut self, _k: usize, _t: f64, state: &VehicleState) -> Result<Command> {
        let g = self.guidance.step(&position(state), self.h);
        let (delta_r, hi) = pid_heading(
            state.eta[5],
            g.los.psi_d,
            state.nu[5],
            self.heading_integ,
            &self.heading_gains,
            self.h,
        );
        let (delta_s, pi) = pid_pitch(
            state.eta[4],
            g.los.theta_d,
            state.nu[4],
            self.pitch_integ,
            &self.pitch_gains,
            self.h,
        );
        self.heading_integ = hi;
        self.pitch_integ = pi;
        Ok(Command {
            ctrl: ControlInput::new(delta_s, delta_r, self.n_p),
            refs: References {
                psi_d: g.los.psi_d,
                theta_d: g.los.theta_d,
                z_d: f64::NAN,
                beta_hat: self.guidance.alos.beta_hat,
                alpha_hat: self.guidance.alos.alpha_hat,
            },
            fault: false,
        })
    }
}
