use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::vehicle::kinematics::rotation_matrix;

/// Irrotational ocean current: horizontal speed and direction (NED) plus a
/// vertical component (positive down).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct OceanCurrent {
    pub V_c: f64,
    pub beta_c: f64,
    #[serde(default)]
    pub W_c: f64,
}

impl OceanCurrent {
    pub fn new(v_c: f64, beta_c: f64, w_c: f64) -> Self {
        Self { V_c: v_c, beta_c, W_c: w_c }
    }

    pub fn ned(&self) -> Vector3<f64> {
        Vector3::new(self.V_c * self.beta_c.cos(), self.V_c * self.beta_c.sin(), self.W_c)
    }
}

/// Current velocity expressed in the body frame.
pub fn current_to_body(current: &OceanCurrent, eta: &Vector6<f64>) -> Vector3<f64> {
    rotation_matrix(eta[3], eta[4], eta[5]).transpose() * current.ned()
}

/// Time derivative of the body-frame current seen by a rotating vehicle,
/// `-S(w) v_c`.
pub fn current_derivative(nu_c_b: &Vector3<f64>, p: f64, q: f64, r: f64) -> Vector3<f64> {
    let (u, v, w) = (nu_c_b[0], nu_c_b[1], nu_c_b[2]);
    Vector3::new(r * v - q * w, -r * u + p * w, q * u - p * v)
}
