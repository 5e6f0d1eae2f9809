//! Chirp and PRBS excitation signals and the data-collection runs that
//! record DeePC datasets from the simulator.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::interpolated_reference;
use crate::classic::PITCH_LIMIT;
use crate::deepc::{persistency_report, Dataset, DatasetMeta, DeePCConfig, DeepcController, PersistencyReport};
use crate::error::{Error, Result};
use crate::sim::{self, Autopilot, Command, References, SimConfig};
use crate::vehicle::{ControlInput, Vehicle, VehicleState};

const DEG: f64 = std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationConfig {
    /// Chirp amplitude (rad).
    pub amplitude: f64,
    /// Sweep start and end frequency (Hz).
    pub f0: f64,
    pub f1: f64,
    /// Length of one sweep (s); later sweeps repeat it.
    pub duration: f64,
    pub prbs_amplitude: f64,
    pub prbs_bit_period: f64,
    pub seed: u64,
    /// Total recording time (s); one sweep when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_duration: Option<f64>,
}

impl ExcitationConfig {
    /// Fin excitation for the heading and pitch datasets.
    pub fn fin() -> Self {
        Self {
            amplitude: 15.0 * DEG,
            f0: 0.01,
            f1: 0.5,
            duration: 300.0,
            prbs_amplitude: 3.0 * DEG,
            prbs_bit_period: 0.35,
            seed: 1,
            record_duration: None,
        }
    }

    /// Pitch-command excitation for the outer depth dataset.
    pub fn pitch_command() -> Self {
        Self {
            amplitude: 15.0 * DEG,
            f0: 0.005,
            f1: 0.1,
            duration: 600.0,
            prbs_amplitude: 3.0 * DEG,
            prbs_bit_period: 4.5,
            seed: 2,
            record_duration: Some(1500.0),
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.record_duration.unwrap_or(self.duration)
    }

    /// Checks the sweep against `f_sample / 4` and the amplitude against
    /// `limit`.
    pub fn validate(&self, f_sample: f64, limit: f64) -> Result<()> {
        let ok = self.amplitude >= 0.0
            && self.prbs_amplitude >= 0.0
            && self.f0 >= 0.0
            && self.f1 >= self.f0
            && self.duration > 0.0
            && self.prbs_bit_period > 0.0
            && self.total_duration() > 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid excitation settings {self:?}")));
        }
        if self.f1 > f_sample / 4.0 {
            return Err(Error::Config(format!(
                "chirp end frequency {} Hz exceeds a quarter of the {f_sample} Hz sample rate",
                self.f1
            )));
        }
        if self.amplitude + self.prbs_amplitude > limit + 1e-12 {
            return Err(Error::Config(format!(
                "excitation peak {:.2} deg exceeds the {:.2} deg limit",
                (self.amplitude + self.prbs_amplitude).to_degrees(),
                limit.to_degrees()
            )));
        }
        Ok(())
    }
}

/// Linear sweep `A sin(2 pi (f0 t + (f1 - f0) t^2 / (2 T)))`, repeated every
/// `T`.
pub fn chirp(t: f64, cfg: &ExcitationConfig) -> f64 {
    let tau = t.rem_euclid(cfg.duration);
    let phase = TAU * (cfg.f0 * tau + (cfg.f1 - cfg.f0) * tau * tau / (2.0 * cfg.duration));
    cfg.amplitude * phase.sin()
}

/// Binary sequence from a 31-bit Fibonacci LFSR (taps 31, 28), one bit per
/// `bit_period`.
#[derive(Debug, Clone)]
pub struct Prbs {
    state: u32,
    bit: u64,
    amplitude: f64,
    bit_period: f64,
}

impl Prbs {
    pub fn new(cfg: &ExcitationConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let state = (rng.random::<u32>() & 0x7fff_ffff).max(1);
        Self {
            state,
            bit: 0,
            amplitude: cfg.prbs_amplitude,
            bit_period: cfg.prbs_bit_period,
        }
    }

    fn shift(&mut self) {
        let fb = ((self.state >> 30) ^ (self.state >> 27)) & 1;
        self.state = ((self.state << 1) | fb) & 0x7fff_ffff;
    }

    /// Value at time `t`. Calls must not go back in time.
    pub fn value(&mut self, t: f64) -> f64 {
        let target = (t / self.bit_period + 1e-9).floor().max(0.0) as u64;
        debug_assert!(target >= self.bit, "PRBS queried backwards in time");
        while self.bit < target {
            self.shift();
            self.bit += 1;
        }
        if self.state & 1 == 1 {
            self.amplitude
        } else {
            -self.amplitude
        }
    }
}

/// Chirp plus PRBS.
#[derive(Debug, Clone)]
pub struct Excitation {
    cfg: ExcitationConfig,
    prbs: Prbs,
}

impl Excitation {
    pub fn new(cfg: ExcitationConfig) -> Self {
        let prbs = Prbs::new(&cfg);
        Self { cfg, prbs }
    }

    pub fn value(&mut self, t: f64) -> f64 {
        chirp(t, &self.cfg) + self.prbs.value(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerChannel {
    /// Rudder to yaw angle.
    Heading,
    /// Stern plane to pitch angle.
    Pitch,
}

impl InnerChannel {
    fn names(self) -> (&'static str, &'static str) {
        match self {
            Self::Heading => ("delta_r", "psi"),
            Self::Pitch => ("delta_s", "theta"),
        }
    }
}

/// Settings shared by the collection runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionSetup {
    pub f_inner: f64,
    pub f_outer: f64,
    /// Propeller speed (rpm).
    pub n_p: f64,
    pub u0: f64,
}

impl Default for CollectionSetup {
    fn default() -> Self {
        Self {
            f_inner: 20.0,
            f_outer: 2.0,
            n_p: 1000.0,
            u0: 1.67,
        }
    }
}

impl CollectionSetup {
    fn sim(&self, t_end: f64, seed: u64) -> SimConfig {
        SimConfig {
            t_end,
            f_inner: self.f_inner,
            f_outer: self.f_outer,
            seed,
            current: Default::default(),
            current_noise: sim::CurrentNoise::NONE,
        }
    }
}

/// Result of a persistency check: the input matrix `[U_p; U_f]` must have
/// full row rank; the rank of the stacked `[U; Y]` is reported alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersistencyCheck {
    pub input: PersistencyReport,
    pub stacked: PersistencyReport,
}

impl PersistencyCheck {
    pub fn passed(&self) -> bool {
        self.input.full_row_rank
    }
}

pub fn check_persistency(data: &Dataset, cfg: &DeePCConfig) -> Result<PersistencyCheck> {
    let b = data.blocks(cfg.T_ini, cfg.T_fut, cfg.kind, Some(cfg.T_d))?;
    Ok(PersistencyCheck {
        input: persistency_report(&b.input_matrix()),
        stacked: persistency_report(&b.stacked()),
    })
}

fn diverged_hint(e: Error) -> Error {
    match e {
        Error::Diverged { t, reason } => Error::Collection(format!(
            "simulation diverged at t = {t:.2} s ({reason}); reduce the excitation amplitude"
        )),
        other => other,
    }
}

/// Open-loop fin excitation at `f_inner` with fixed propeller speed. Samples
/// are paired as `(u_k, y_{k+1})`. Fails when the recorded inputs are not
/// persistently exciting for `deepc`.
pub fn collect_inner(
    vehicle: &Vehicle,
    channel: InnerChannel,
    cfg: &ExcitationConfig,
    setup: &CollectionSetup,
    deepc: &DeePCConfig,
) -> Result<Dataset> {
    cfg.validate(setup.f_inner, vehicle.params().delta_max)?;
    let h = 1.0 / setup.f_inner;
    let samples = (cfg.total_duration() * setup.f_inner).round() as usize;
    let mut exc = Excitation::new(cfg.clone());
    let mut state = VehicleState::at_surge(setup.u0);
    let mut u = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    let current = Default::default();
    for k in 0..samples {
        let t = k as f64 * h;
        let delta = exc.value(t);
        let ctrl = match channel {
            InnerChannel::Heading => ControlInput::new(0.0, delta, setup.n_p),
            InnerChannel::Pitch => ControlInput::new(delta, 0.0, setup.n_p),
        };
        state = sim::integrate_step(vehicle, &state, &ctrl, &current, h, t)
            .and_then(|s| sim::check_guard(&s, t + h).map(|_| s))
            .map_err(diverged_hint)?;
        let applied = ctrl.saturate(vehicle.params());
        u.push(match channel {
            InnerChannel::Heading => applied.delta_r,
            InnerChannel::Pitch => applied.delta_s,
        });
        y.push(match channel {
            InnerChannel::Heading => state.eta[5],
            InnerChannel::Pitch => state.eta[4],
        });
    }
    let (un, yn) = channel.names();
    let data = Dataset {
        t: (0..samples).map(|k| k as f64 * h).collect(),
        u: DMatrix::from_column_slice(samples, 1, &u),
        y: DMatrix::from_column_slice(samples, 1, &y),
        meta: DatasetMeta {
            inputs: vec![un.into()],
            outputs: vec![yn.into()],
            dt: h,
            seed: cfg.seed,
            source: serde_json::json!({
                "stage": "inner",
                "channel": channel,
                "excitation": cfg,
                "setup": setup,
                "deepc": deepc,
            }),
        },
    };
    require_persistency(&data, deepc)?;
    Ok(data)
}

fn require_persistency(data: &Dataset, deepc: &DeePCConfig) -> Result<()> {
    let check = check_persistency(data, deepc)?;
    if !check.passed() {
        return Err(Error::Collection(format!(
            "input data are not persistently exciting: rank {} of {} (sigma_min {:.3e})",
            check.input.rank, check.input.rows, check.input.sigma_min
        )));
    }
    Ok(())
}

struct OuterCollector {
    inner: DeepcController,
    /// Pitch command at each outer tick.
    commands: Vec<f64>,
    r_f: usize,
    n_p: f64,
    last_delta: f64,
    theta: Vec<f64>,
    z: Vec<f64>,
    t: Vec<f64>,
}

impl Autopilot for OuterCollector {
    fn inner(&mut self, k: usize, t: f64, state: &VehicleState) -> Result<Command> {
        let theta = state.eta[4];
        if k % self.r_f == self.r_f - 1 {
            self.theta.push(theta);
            self.z.push(state.eta[2]);
            self.t.push(t);
        }
        if k == 0 {
            self.inner.fill_history(&[0.0], &[theta]);
        } else {
            self.inner.push(&[self.last_delta], &[theta]);
        }
        // Pitch command held over each outer period, then ramped to the
        // next one, as in closed-loop operation.
        let j = k / self.r_f;
        let cur = self.commands[j];
        let next = self.commands[j + 1];
        let offset = k % self.r_f;
        let n = self.inner.horizon();
        let r = interpolated_reference(cur, next, self.r_f, offset, n);
        let out = self.inner.solve(&r, None);
        self.last_delta = out.u[0];
        Ok(Command {
            ctrl: ControlInput::new(out.u[0], 0.0, self.n_p),
            refs: References {
                theta_d: cur + (next - cur) * offset as f64 / self.r_f as f64,
                ..References::default()
            },
            fault: out.fault,
        })
    }
}

/// Second collection stage: the inner pitch DeePC tracks an excited pitch
/// command while realized pitch and depth are recorded every `r_f` ticks
/// (at ticks `k` with `k mod r_f = r_f - 1`).
pub fn collect_outer(
    vehicle: &Vehicle,
    inner: DeepcController,
    cfg: &ExcitationConfig,
    setup: &CollectionSetup,
    deepc: &DeePCConfig,
) -> Result<Dataset> {
    let sim_cfg = setup.sim(cfg.total_duration(), cfg.seed);
    sim_cfg.validate()?;
    cfg.validate(setup.f_outer, PITCH_LIMIT)?;
    let r_f = sim_cfg.rate_ratio();
    let period = r_f as f64 * sim_cfg.h();
    let mut exc = Excitation::new(cfg.clone());
    let commands = (0..sim_cfg.ticks() / r_f + 2)
        .map(|j| exc.value(j as f64 * period).clamp(-PITCH_LIMIT, PITCH_LIMIT))
        .collect();
    let mut col = OuterCollector {
        inner,
        commands,
        r_f,
        n_p: setup.n_p,
        last_delta: 0.0,
        theta: Vec::new(),
        z: Vec::new(),
        t: Vec::new(),
    };
    let outcome = sim::run(vehicle, &sim_cfg, VehicleState::at_surge(setup.u0), &mut col);
    if let Some(e) = outcome.error {
        return Err(diverged_hint(e));
    }
    let n = col.theta.len();
    let data = Dataset {
        t: col.t,
        u: DMatrix::from_column_slice(n, 1, &col.theta),
        y: DMatrix::from_column_slice(n, 1, &col.z),
        meta: DatasetMeta {
            inputs: vec!["theta".into()],
            outputs: vec!["z".into()],
            dt: r_f as f64 * sim_cfg.h(),
            seed: cfg.seed,
            source: serde_json::json!({
                "stage": "outer",
                "excitation": cfg,
                "setup": setup,
                "deepc": deepc,
                "inner_faults": col.inner.fault_count(),
            }),
        },
    };
    require_persistency(&data, deepc)?;
    Ok(data)
}
