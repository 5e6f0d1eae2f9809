//! Scenario runner: wires DeePC or PID autopilots from a scenario file,
//! simulates, and reports RMSE metrics.

pub mod autopilots;
pub mod metrics;
pub mod scenario;

use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use crate::angles::rad;
use crate::cascade::Cascade;
use crate::deepc::{Dataset, DeePCConfig, DeepcController, QpSettings};
use crate::error::{Error, Result};
use crate::excitation::{collect_inner, collect_outer, InnerChannel};
use crate::guidance::{Guidance, LosObserver, WaypointPath};
use crate::sim::{self, Autopilot, SimConfig, TrajectoryLog};
use crate::vehicle::{Vehicle, VehicleState};

pub use autopilots::{DeepcPath, DeepcSetpoint, PidPath, PidSetpoint, RefPlan};
pub use metrics::{compare, format_comparison, rmse, ChannelComparison, MetricsReport, SolverSummary, Winner};
pub use scenario::{ControllerKind, Mode, Scenario};

/// Builds a controller from recorded data and checks the channel names.
/// With `anchor` the output columns are shifted to start from zero (see
/// [`DataBlocks::anchored`]); the controller must then be solved with the
/// latest output as offset.
///
/// [`DataBlocks::anchored`]: crate::deepc::DataBlocks::anchored
pub fn controller_from_data(
    data: &Dataset,
    cfg: &DeePCConfig,
    input: &str,
    output: &str,
    anchor: bool,
) -> Result<DeepcController> {
    if data.meta.inputs != [input] || data.meta.outputs != [output] {
        return Err(Error::Config(format!(
            "dataset has channels {:?} -> {:?}, expected [{input}] -> [{output}]",
            data.meta.inputs, data.meta.outputs
        )));
    }
    let mut blocks = data.blocks(cfg.T_ini, cfg.T_fut, cfg.kind, Some(cfg.T_d))?;
    if anchor {
        blocks = blocks.anchored();
    }
    DeepcController::new(blocks, cfg.clone(), QpSettings::default())
}

fn load_or(path: &Option<PathBuf>, collect: impl FnOnce() -> Result<Dataset>) -> Result<Dataset> {
    match path {
        Some(p) => Dataset::load(p),
        None => collect(),
    }
}

/// Datasets of the three DeePC loops; `depth` only in setpoint mode.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub heading: Dataset,
    pub pitch: Dataset,
    pub depth: Option<Dataset>,
}

pub fn prepare_data(vehicle: &Vehicle, s: &Scenario) -> Result<ScenarioData> {
    let c = &s.collection;
    let d = &s.deepc;
    let heading = load_or(&d.data.heading, || {
        collect_inner(vehicle, InnerChannel::Heading, &c.heading, &c.setup, &d.heading)
    })?;
    let pitch = load_or(&d.data.pitch, || {
        collect_inner(vehicle, InnerChannel::Pitch, &c.pitch, &c.setup, &d.pitch)
    })?;
    let depth = match s.mode {
        Mode::Path => None,
        Mode::Setpoint => Some(load_or(&d.data.depth, || {
            let inner = controller_from_data(&pitch, &d.pitch, "delta_s", "theta", false)?;
            collect_outer(vehicle, inner, &c.depth, &c.setup, &d.depth)
        })?),
    };
    Ok(ScenarioData { heading, pitch, depth })
}

pub fn initial_state(vehicle: &Vehicle, s: &Scenario) -> VehicleState {
    let u = s.initial.u.unwrap_or_else(|| vehicle.steady_surge_speed(s.n_p));
    let mut state = VehicleState::at_surge(u);
    state.eta[5] = rad(s.initial.heading);
    match &s.path {
        Some(p) => {
            let w = p.waypoints[0];
            state.eta[0] = w[0];
            state.eta[1] = w[1];
            state.eta[2] = w[2];
        }
        None => state.eta[2] = s.initial.depth,
    }
    state
}

pub fn sim_config(s: &Scenario) -> SimConfig {
    SimConfig {
        t_end: s.duration,
        f_inner: s.rates.f_inner,
        f_outer: s.rates.f_outer,
        seed: s.seed,
        current: s.current,
        current_noise: s.current_noise,
    }
}

enum Wired {
    DeepcSetpoint(DeepcSetpoint),
    PidSetpoint(PidSetpoint),
    DeepcPath(DeepcPath),
    PidPath(PidPath),
}

impl Wired {
    fn autopilot(&mut self) -> &mut dyn Autopilot {
        match self {
            Wired::DeepcSetpoint(a) => a,
            Wired::PidSetpoint(a) => a,
            Wired::DeepcPath(a) => a,
            Wired::PidPath(a) => a,
        }
    }

    fn solver_summary(&self) -> SolverSummary {
        match self {
            Wired::DeepcSetpoint(a) => a.solver_summary(),
            Wired::DeepcPath(a) => a.solver_summary(),
            _ => SolverSummary::default(),
        }
    }
}

const ANCHOR: bool = true;

fn wire(vehicle: &Vehicle, s: &Scenario, state: &VehicleState) -> Result<Wired> {
    let h = 1.0 / s.rates.f_inner;
    let r_f = s.rates.rate_ratio()?;
    let guidance = |p: &scenario::PathPlan| -> Result<Guidance> {
        let path = WaypointPath::from_triples(&p.waypoints, p.r_switch)?;
        let obs = LosObserver::new(p.observer_omega, state.eta[5], state.eta[4]);
        Guidance::new(path, p.alos, obs)
    };
    Ok(match (s.controller, &s.setpoint, &s.path) {
        (ControllerKind::Pid, Some(sp), _) => Wired::PidSetpoint(PidSetpoint::new(
            s.pid.heading,
            s.pid.depth,
            RefPlan::new(sp.heading, rad(1.0)),
            RefPlan::new(sp.depth, 1.0),
            h,
            s.n_p,
        )),
        (ControllerKind::Pid, None, Some(p)) => {
            Wired::PidPath(PidPath::new(s.pid.heading, s.pid.depth.pitch, guidance(p)?, h, s.n_p))
        }
        (ControllerKind::Deepc, sp, p) => {
            let data = prepare_data(vehicle, s)?;
            let d = &s.deepc;
            let heading = controller_from_data(&data.heading, &d.heading, "delta_r", "psi", ANCHOR)?;
            let pitch = controller_from_data(&data.pitch, &d.pitch, "delta_s", "theta", false)?;
            match (sp, p, &data.depth) {
                (Some(sp), _, Some(depth)) => {
                    let outer = controller_from_data(depth, &d.depth, "theta", "z", ANCHOR)?;
                    let cascade = Cascade::new(pitch, outer, r_f, s.rates.theta_d_hold)?;
                    Wired::DeepcSetpoint(DeepcSetpoint::new(
                        heading,
                        cascade,
                        RefPlan::new(sp.heading, rad(1.0)),
                        RefPlan::new(sp.depth, 1.0),
                        h,
                        s.n_p,
                    ))
                }
                (None, Some(p), _) => Wired::DeepcPath(DeepcPath::new(heading, pitch, guidance(p)?, h, s.n_p)),
                _ => return Err(Error::Config("scenario has neither a setpoint nor a path".into())),
            }
        }
        _ => return Err(Error::Config("scenario has neither a setpoint nor a path".into())),
    })
}

#[derive(Debug)]
pub struct RunOutput {
    pub log: TrajectoryLog,
    pub metrics: MetricsReport,
    /// Set when the run stopped early, e.g. on divergence.
    pub error: Option<Error>,
}

pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    s.validate()?;
    let vehicle = Vehicle::remus100();
    let state = initial_state(&vehicle, s);
    let mut wired = wire(&vehicle, s, &state)?;
    let outcome = sim::run(&vehicle, &sim_config(s), state, wired.autopilot());
    let ch = metrics::channel_metrics(&outcome.log, s.mode == Mode::Setpoint);
    let waypoint_distances = s.path.as_ref().map(|p| {
        p.waypoints
            .iter()
            .map(|w| {
                let w = Vector3::from(*w);
                outcome
                    .log
                    .rows()
                    .iter()
                    .map(|r| (Vector3::new(r.state.eta[0], r.state.eta[1], r.state.eta[2]) - w).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    });
    let split = |c: Option<(Option<f64>, Option<f64>)>| c.map_or((None, None), |c| c);
    let (psi_rmse, psi_max_error) = split(ch.psi);
    let (z_rmse, z_max_error) = split(ch.z);
    let (theta_rmse, theta_max_error) = split(ch.theta);
    let metrics = MetricsReport {
        schema_version: metrics::METRICS_SCHEMA_VERSION,
        scenario: s.name.clone(),
        controller: s.controller,
        mode: s.mode,
        seed: s.seed,
        duration: s.duration,
        psi_rmse,
        z_rmse,
        theta_rmse,
        psi_max_error,
        z_max_error,
        theta_max_error,
        z_final_max_error: ch.z_final,
        z_overshoot: ch.z_overshoot,
        waypoint_distances,
        solver: wired.solver_summary(),
    };
    Ok(RunOutput {
        log: outcome.log,
        metrics,
        error: outcome.error,
    })
}

/// Paths of the files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub metrics: PathBuf,
}

/// Writes `<name>.csv` and `<name>.metrics.json` into `dir`.
pub fn write_outputs(out: &RunOutput, dir: impl AsRef<Path>) -> Result<OutputFiles> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv = dir.join(format!("{}.csv", out.metrics.scenario));
    let json = dir.join(format!("{}.metrics.json", out.metrics.scenario));
    out.log.write_csv(&csv)?;
    std::fs::write(&json, out.metrics.to_json()).map_err(|source| Error::Io {
        path: json.clone(),
        source,
    })?;
    Ok(OutputFiles { csv, metrics: json })
}
