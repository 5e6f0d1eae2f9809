//! REMUS-100 rigid-body kinematics and hydrodynamics.

pub mod current;
pub mod dynamics;
pub mod forces;
pub mod geometry;
pub mod hydro;
pub mod kinematics;
pub mod params;

use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use current::{current_derivative, current_to_body, OceanCurrent};
pub use dynamics::{state_derivative, state_derivative_with, ForceTerms, StateVector};
pub use forces::{actuator_forces, crossflow_drag, lift_drag_forces};
pub use geometry::{lamb_factors, spheroid_from_envelope, spheroid_geometry, LambFactors, Spheroid};
pub use hydro::{coriolis_matrix, damping_matrix, restoring_forces, DerivedHydro};
pub use kinematics::{angular_rate_matrix, kinematics, rotation_matrix};
pub use params::{CoeffTable, CrossflowPairing, VehicleParams};

/// Pose `eta = [x, y, z, phi, theta, psi]` (NED) and body velocity
/// `nu = [u, v, w, p, q, r]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub eta: Vector6<f64>,
    pub nu: Vector6<f64>,
}

impl VehicleState {
    pub fn new(eta: Vector6<f64>, nu: Vector6<f64>) -> Self {
        Self { eta, nu }
    }

    /// Level at the origin, moving straight ahead at `u`.
    pub fn at_surge(u: f64) -> Self {
        Self {
            eta: Vector6::zeros(),
            nu: Vector6::new(u, 0.0, 0.0, 0.0, 0.0, 0.0),
        }
    }

    pub fn to_vector(&self) -> StateVector {
        let mut x = StateVector::zeros();
        x.fixed_rows_mut::<6>(0).copy_from(&self.eta);
        x.fixed_rows_mut::<6>(6).copy_from(&self.nu);
        x
    }

    pub fn from_vector(x: &StateVector) -> Self {
        Self {
            eta: x.fixed_rows::<6>(0).into_owned(),
            nu: x.fixed_rows::<6>(6).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(self.nu.iter()).all(|v| v.is_finite())
    }

    pub fn position(&self) -> [f64; 3] {
        [self.eta[0], self.eta[1], self.eta[2]]
    }
}

/// Stern plane and rudder deflection (rad) and propeller speed (rpm).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub delta_s: f64,
    pub delta_r: f64,
    pub n_p: f64,
}

impl ControlInput {
    pub fn new(delta_s: f64, delta_r: f64, n_p: f64) -> Self {
        Self { delta_s, delta_r, n_p }
    }

    /// Clamps the fins to `+-delta_max` and the propeller to `n_max`.
    /// Negative propeller speeds are left for the force model to reject.
    pub fn saturate(&self, params: &VehicleParams) -> Self {
        let d = params.delta_max;
        Self {
            delta_s: self.delta_s.clamp(-d, d),
            delta_r: self.delta_r.clamp(-d, d),
            n_p: self.n_p.min(params.n_max),
        }
    }
}

/// Parameters together with the quantities derived from them.
#[derive(Debug, Clone)]
pub struct Vehicle {
    params: VehicleParams,
    hydro: DerivedHydro,
}

impl Vehicle {
    pub fn new(params: VehicleParams) -> Result<Self> {
        params.validate()?;
        let hydro = DerivedHydro::new(&params)?;
        Ok(Self { params, hydro })
    }

    pub fn remus100() -> Self {
        Self::new(VehicleParams::remus100()).expect("shipped parameters are valid")
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn hydro(&self) -> &DerivedHydro {
        &self.hydro
    }

    pub fn derivative(
        &self,
        state: &VehicleState,
        ctrl: &ControlInput,
        current: &OceanCurrent,
    ) -> Result<StateVector> {
        state_derivative(state, ctrl, current, &self.params, &self.hydro)
    }

    pub fn derivative_with(
        &self,
        state: &VehicleState,
        ctrl: &ControlInput,
        current: &OceanCurrent,
        terms: ForceTerms,
    ) -> Result<StateVector> {
        state_derivative_with(state, ctrl, current, &self.params, &self.hydro, terms)
    }

    pub fn energy(&self, state: &VehicleState) -> f64 {
        dynamics::mechanical_energy(state, &self.params, &self.hydro)
    }

    pub fn steady_surge_speed(&self, n_p: f64) -> f64 {
        dynamics::steady_surge_speed(n_p, &self.params, &self.hydro)
    }
}
