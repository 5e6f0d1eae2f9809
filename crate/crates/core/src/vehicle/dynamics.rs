use nalgebra::{SVector, Vector3, Vector6};

use crate::error::Result;
use crate::vehicle::current::{current_derivative, current_to_body, OceanCurrent};
use crate::vehicle::forces::{actuator_forces, crossflow_drag, lift_drag_forces, munk_cancellation};
use crate::vehicle::hydro::{coriolis_matrix, damping_matrix, restoring_forces, DerivedHydro};
use crate::vehicle::kinematics::kinematics;
use crate::vehicle::{ControlInput, VehicleParams, VehicleState};

pub type StateVector = SVector<f64, 12>;

/// Selects which load terms enter the kinetics. Coriolis and restoring terms
/// are always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForceTerms {
    pub damping: bool,
    pub actuators: bool,
    pub lift_drag: bool,
    pub crossflow: bool,
    /// Munk-cancelling lift moments; also gated by the parameter flag.
    pub munk_cancellation: bool,
}

impl ForceTerms {
    pub const ALL: Self = Self {
        damping: true,
        actuators: true,
        lift_drag: true,
        crossflow: true,
        munk_cancellation: true,
    };
    /// Only the conservative rigid-body and added-mass terms.
    pub const CONSERVATIVE: Self = Self {
        damping: false,
        actuators: false,
        lift_drag: false,
        crossflow: false,
        munk_cancellation: false,
    };
}

impl Default for ForceTerms {
    fn default() -> Self {
        Self::ALL
    }
}

/// `[eta_dot; nu_dot]` for the given state, saturated input and current.
pub fn state_derivative(
    state: &VehicleState,
    ctrl: &ControlInput,
    current: &OceanCurrent,
    params: &VehicleParams,
    hydro: &DerivedHydro,
) -> Result<StateVector> {
    state_derivative_with(state, ctrl, current, params, hydro, ForceTerms::ALL)
}

pub fn state_derivative_with(
    state: &VehicleState,
    ctrl: &ControlInput,
    current: &OceanCurrent,
    params: &VehicleParams,
    hydro: &DerivedHydro,
    terms: ForceTerms,
) -> Result<StateVector> {
    let eta = &state.eta;
    let nu = &state.nu;
    let eta_dot = kinematics(eta, nu)?;

    let nu_c = current_to_body(current, eta);
    let mut nu_r = *nu;
    nu_r[0] -= nu_c[0];
    nu_r[1] -= nu_c[1];
    nu_r[2] -= nu_c[2];

    let mut load = -coriolis_matrix(&nu_r, params, hydro) * nu_r - restoring_forces(eta, params);
    if terms.damping {
        load -= damping_matrix(&nu_r, hydro) * nu_r;
    }
    if terms.actuators {
        load += actuator_forces(ctrl, &nu_r, params)?;
    }
    if terms.lift_drag {
        load += lift_drag_forces(&nu_r, params);
    }
    if terms.crossflow {
        load += crossflow_drag(&nu_r, params);
    }
    if terms.munk_cancellation && params.munk_cancellation {
        load += munk_cancellation(&nu_r, hydro);
    }
    let nu_r_dot = hydro.m_inv * load;
    let nu_c_dot = current_derivative(&nu_c, nu[3], nu[4], nu[5]);

    let mut out = StateVector::zeros();
    out.fixed_rows_mut::<6>(0).copy_from(&eta_dot);
    out.fixed_rows_mut::<6>(6).copy_from(&nu_r_dot);
    for i in 0..3 {
        out[6 + i] += nu_c_dot[i];
    }
    Ok(out)
}

/// Kinetic plus gravity/buoyancy potential energy of a neutrally buoyant
/// vehicle (the potential is zero at level attitude).
pub fn mechanical_energy(state: &VehicleState, params: &VehicleParams, hydro: &DerivedHydro) -> f64 {
    let kinetic = 0.5 * state.nu.dot(&(hydro.m * state.nu));
    let (phi, theta) = (state.eta[3], state.eta[4]);
    let [xg, yg, zg] = params.r_bG;
    let w = params.m * params.g0;
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let potential = w * (xg * sth - yg * cth * sphi - zg * cth * cphi + zg);
    kinetic + potential
}

/// Surge speed at which propeller thrust balances linear and hull drag in
/// straight, level, current-free motion.
pub fn steady_surge_speed(n_p: f64, params: &VehicleParams, hydro: &DerivedHydro) -> f64 {
    let thrust = params.alpha_X * n_p * n_p + params.beta_X * n_p;
    let residual = |u: f64| {
        let nu = Vector6::new(u, 0.0, 0.0, 0.0, 0.0, 0.0);
        thrust + lift_drag_forces(&nu, params)[0] - damping_matrix(&nu, hydro)[(0, 0)] * u
    };
    if thrust <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while residual(hi) > 0.0 && hi < 100.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Body-frame linear velocity relative to the water.
pub fn relative_velocity(state: &VehicleState, current: &OceanCurrent) -> Vector3<f64> {
    let nu_c = current_to_body(current, &state.eta);
    Vector3::new(state.nu[0], state.nu[1], state.nu[2]) - nu_c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::Vehicle;

    #[test]
    fn level_rest_is_equilibrium() {
        let v = Vehicle::remus100();
        let d = v
            .derivative(&VehicleState::default(), &ControlInput::default(), &OceanCurrent::default())
            .unwrap();
        assert!(d.norm() < 1e-14);
    }

    #[test]
    fn surge_acceleration_sign_matches_force_balance() {
        let v = Vehicle::remus100();
        let p = v.params();
        for (u, n) in [(0.5, 1000.0), (2.5, 1000.0), (1.0, 0.0), (1.6, 1200.0)] {
            let state = VehicleState::at_surge(u);
            let ctrl = ControlInput::new(0.0, 0.0, n);
            let d = v.derivative(&state, &ctrl, &OceanCurrent::default()).unwrap();
            // scalar oracle: thrust - linear drag - hull drag at zero incidence
            let x_u = v.hydro().lin_damping[0];
            let f = p.alpha_X * n * n + p.beta_X * n + x_u * (-3.0 * u).exp() * u
                - 0.5 * p.rho * u * u * p.S * p.C_D.eval(0.0);
            assert_eq!(d[6].signum(), f.signum(), "u = {u}, n = {n}");
        }
    }

    #[test]
    fn current_shifts_relative_velocity() {
        let state = VehicleState::at_surge(1.5);
        let c = OceanCurrent::new(0.5, 0.3, 0.05);
        let rel = relative_velocity(&state, &c);
        let ned = c.ned();
        assert!((rel - (Vector3::new(1.5, 0.0, 0.0) - ned)).norm() < 1e-15);
    }

    #[test]
    fn steady_speed_balances_surge() {
        let v = Vehicle::remus100();
        let u = steady_surge_speed(1000.0, v.params(), v.hydro());
        assert!(u > 1.0 && u < 2.5, "u = {u}");
        let d = v
            .derivative(
                &VehicleState::at_surge(u),
                &ControlInput::new(0.0, 0.0, 1000.0),
                &OceanCurrent::default(),
            )
            .unwrap();
        assert!(d[6].abs() < 1e-9);
    }

    #[test]
    fn gimbal_error_propagates() {
        let v = Vehicle::remus100();
        let mut s = VehicleState::default();
        s.eta[4] = std::f64::consts::FRAC_PI_2;
        assert!(v
            .derivative(&s, &ControlInput::default(), &OceanCurrent::default())
            .is_err());
    }
}
