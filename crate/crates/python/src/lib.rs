use nalgebra::{DMatrix, DVector, Vector6};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use deepc_auv::deepc::{partition, Dataset, DeePCConfig, DeepcController, QpSettings};
use deepc_auv::error::Error;
use deepc_auv::experiments::{self, Scenario};
use deepc_auv::guidance::{alos_commands, AlosState};
use deepc_auv::sim::integrate_step;
use deepc_auv::vehicle::{ControlInput, OceanCurrent, VehicleState};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidParam { .. } | Error::Dimension(_) | Error::Json { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn preset(name: &str) -> PyResult<DeePCConfig> {
    match name {
        "heading" => Ok(DeePCConfig::heading()),
        "pitch" => Ok(DeePCConfig::pitch()),
        "depth" => Ok(DeePCConfig::depth()),
        _ => Err(PyValueError::new_err(format!("unknown preset `{name}`"))),
    }
}

/// A DeePC configuration given as a preset name or a JSON object.
fn config(text: &str) -> PyResult<DeePCConfig> {
    if text.trim_start().starts_with('{') {
        let cfg: DeePCConfig = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        cfg.validate().map_err(to_py)?;
        Ok(cfg)
    } else {
        preset(text)
    }
}

fn state_from(x: [f64; 12]) -> VehicleState {
    VehicleState::new(Vector6::from_column_slice(&x[..6]), Vector6::from_column_slice(&x[6..]))
}

fn state_to(s: &VehicleState) -> [f64; 12] {
    let mut out = [0.0; 12];
    out[..6].copy_from_slice(s.eta.as_slice());
    out[6..].copy_from_slice(s.nu.as_slice());
    out
}

/// DeePC preset as a JSON string, for editing and passing back.
#[pyfunction]
fn deepc_preset(name: &str) -> PyResult<String> {
    Ok(serde_json::to_string_pretty(&preset(name)?).expect("config serializes"))
}

/// The REMUS 100 model with the bundled parameters.
#[pyclass(name = "Vehicle")]
struct PyVehicle(deepc_auv::vehicle::Vehicle);

#[pymethods]
impl PyVehicle {
    #[new]
    fn new() -> Self {
        Self(deepc_auv::vehicle::Vehicle::remus100())
    }

    fn steady_surge_speed(&self, n_p: f64) -> f64 {
        self.0.steady_surge_speed(n_p)
    }

    /// `[eta_dot; nu_dot]` for `state = [eta; nu]`.
    #[pyo3(signature = (state, delta_s, delta_r, n_p, current = (0.0, 0.0, 0.0)))]
    fn derivative(
        &self,
        state: [f64; 12],
        delta_s: f64,
        delta_r: f64,
        n_p: f64,
        current: (f64, f64, f64),
    ) -> PyResult<Vec<f64>> {
        let c = OceanCurrent::new(current.0, current.1, current.2);
        let d = self
            .0
            .derivative(&state_from(state), &ControlInput::new(delta_s, delta_r, n_p), &c)
            .map_err(to_py)?;
        Ok(d.iter().copied().collect())
    }

    /// One RK4 step of length `h` with the input and current held.
    #[pyo3(signature = (state, delta_s, delta_r, n_p, h, current = (0.0, 0.0, 0.0)))]
    fn step(
        &self,
        state: [f64; 12],
        delta_s: f64,
        delta_r: f64,
        n_p: f64,
        h: f64,
        current: (f64, f64, f64),
    ) -> PyResult<[f64; 12]> {
        let c = OceanCurrent::new(current.0, current.1, current.2);
        let ctrl = ControlInput::new(delta_s, delta_r, n_p);
        let next = integrate_step(&self.0, &state_from(state), &ctrl, &c, h, 0.0).map_err(to_py)?;
        Ok(state_to(&next))
    }

    fn energy(&self, state: [f64; 12]) -> f64 {
        self.0.energy(&state_from(state))
    }
}

/// Receding-horizon DeePC for one input and one output.
#[pyclass(name = "DeepcController")]
struct PyDeepc(DeepcController);

#[pymethods]
impl PyDeepc {
    /// From input and output records of equal length. `config` is a preset
    /// name or a JSON object.
    #[new]
    #[pyo3(signature = (u, y, config = "heading"))]
    fn new(u: Vec<f64>, y: Vec<f64>, config: &str) -> PyResult<Self> {
        if u.len() != y.len() {
            return Err(PyValueError::new_err("u and y must have the same length"));
        }
        let cfg = self::config(config)?;
        let (u, y) = (DMatrix::from_vec(u.len(), 1, u), DMatrix::from_vec(y.len(), 1, y));
        let blocks = partition(&u, &y, cfg.T_ini, cfg.T_fut, cfg.kind, Some(cfg.T_d)).map_err(to_py)?;
        DeepcController::new(blocks, cfg, QpSettings::default()).map(Self).map_err(to_py)
    }

    /// From a dataset CSV with its JSON sidecar.
    #[staticmethod]
    #[pyo3(signature = (path, config = "heading"))]
    fn from_dataset(path: &str, config: &str) -> PyResult<Self> {
        let data = Dataset::load(path).map_err(to_py)?;
        let cfg = self::config(config)?;
        let (input, output) = match (data.meta.inputs.as_slice(), data.meta.outputs.as_slice()) {
            ([i], [o]) => (i.clone(), o.clone()),
            _ => return Err(PyValueError::new_err("dataset must have one input and one output")),
        };
        experiments::controller_from_data(&data, &cfg, &input, &output, false)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn t_ini(&self) -> usize {
        self.0.t_ini()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon()
    }

    fn fill_history(&mut self, u: f64, y: f64) {
        self.0.fill_history(&[u], &[y]);
    }

    /// Appends the pair `(u_t, y_{t+1})`.
    fn push(&mut self, u: f64, y: f64) {
        self.0.push(&[u], &[y]);
    }

    /// Solves against `r` (one value per horizon step) and returns
    /// `(u, y_pred, fault)`; `y_pred` is empty on a fault.
    #[pyo3(signature = (r, y_offset = None))]
    fn solve(&mut self, r: Vec<f64>, y_offset: Option<f64>) -> PyResult<(f64, Vec<f64>, bool)> {
        if r.len() != self.0.horizon() {
            return Err(PyValueError::new_err(format!(
                "reference has {} values, horizon is {}",
                r.len(),
                self.0.horizon()
            )));
        }
        let offset = y_offset.map(|v| DVector::from_element(1, v));
        let out = self.0.solve(&DVector::from_vec(r), offset.as_ref());
        let y_pred = out.solution.map(|s| s.y_pred.iter().copied().collect()).unwrap_or_default();
        Ok((out.u[0], y_pred, out.fault))
    }
}

/// ALOS heading and pitch commands for track errors `(x_e, y_e, z_e)`.
#[pyfunction]
#[pyo3(signature = (errors, pi_h, pi_v, beta_hat = 0.0, alpha_hat = 0.0, delta = 10.0))]
fn alos(errors: [f64; 3], pi_h: f64, pi_v: f64, beta_hat: f64, alpha_hat: f64, delta: f64) -> (f64, f64) {
    let state = AlosState {
        beta_hat,
        alpha_hat,
        Delta_h: delta,
        Delta_v: delta,
        ..AlosState::default()
    };
    alos_commands(&errors.into(), &state, pi_h, pi_v)
}

#[pyfunction]
#[pyo3(signature = (signal, reference, angle = false))]
fn rmse(signal: Vec<f64>, reference: Vec<f64>, angle: bool) -> Option<f64> {
    experiments::rmse(&signal, &reference, angle)
}

/// Runs a scenario file and returns the metrics as a JSON string. With
/// `out_dir` the trajectory CSV and metrics file are written there too.
#[pyfunction]
#[pyo3(signature = (path, seed = None, out_dir = None))]
fn run_scenario(py: Python<'_>, path: &str, seed: Option<u64>, out_dir: Option<&str>) -> PyResult<String> {
    let mut s = Scenario::load(path).map_err(to_py)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let out = py.detach(|| experiments::run_scenario(&s)).map_err(to_py)?;
    if let Some(dir) = out_dir {
        experiments::write_outputs(&out, dir).map_err(to_py)?;
    }
    match out.error {
        Some(e) => Err(to_py(e)),
        None => Ok(out.metrics.to_json()),
    }
}

#[pymodule]
fn deepc_auv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVehicle>()?;
    m.add_class::<PyDeepc>()?;
    m.add_function(wrap_pyfunction!(deepc_preset, m)?)?;
    m.add_function(wrap_pyfunction!(alos, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
