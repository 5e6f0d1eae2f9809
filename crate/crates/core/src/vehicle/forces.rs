//! Actuator, lift/drag and cross-flow loads in the body frame.

use nalgebra::Vector6;

use crate::error::{Error, Result};
use crate::vehicle::hydro::{relative_speed, DerivedHydro};
use crate::vehicle::{ControlInput, CrossflowPairing, VehicleParams};

/// Below this relative speed the angle of attack is undefined and the hull
/// lift/drag is taken as zero.
pub const MIN_LIFT_SPEED: f64 = 1e-6;

/// Simpson panels per integration interval (21 nodes).
const SIMPSON_PANELS: usize = 20;

/// Fin and propeller loads `[X_prop + X_r + X_s, Y_r, Z_s, K_prop, -x_s Z_s, x_r Y_r]`.
pub fn actuator_forces(
    ctrl: &ControlInput,
    nu_r: &Vector6<f64>,
    params: &VehicleParams,
) -> Result<Vector6<f64>> {
    if ctrl.n_p < 0.0 {
        return Err(Error::ReverseThrust { n_p: ctrl.n_p });
    }
    let (u, v, w) = (nu_r[0], nu_r[1], nu_r[2]);
    let u_rh2 = u * u + v * v;
    let u_rv2 = u * u + w * w;
    let q_r = 0.5 * params.rho * u_rh2 * params.A_r * params.C_L_delta_r;
    let q_s = 0.5 * params.rho * u_rv2 * params.A_s * params.C_L_delta_s;
    let x_r = -q_r * ctrl.delta_r * ctrl.delta_r;
    let x_s = -q_s * ctrl.delta_s * ctrl.delta_s;
    let y_r = -q_r * ctrl.delta_r;
    let z_s = -q_s * ctrl.delta_s;
    let n = ctrl.n_p;
    let x_prop = params.alpha_X * n * n + params.beta_X * n;
    let k_prop = params.alpha_K * n * n + params.beta_K * n;
    Ok(Vector6::new(
        x_prop + x_r + x_s,
        y_r,
        z_s,
        k_prop,
        -params.x_s * z_s,
        params.x_r * y_r,
    ))
}

/// Hull lift and drag resolved into surge and heave.
pub fn lift_drag_forces(nu_r: &Vector6<f64>, params: &VehicleParams) -> Vector6<f64> {
    let speed = relative_speed(nu_r);
    if speed < MIN_LIFT_SPEED {
        return Vector6::zeros();
    }
    let alpha = nu_r[2].atan2(nu_r[0]);
    let dyn_pressure = 0.5 * params.rho * speed * speed * params.S;
    let lift = dyn_pressure * params.C_L.eval(alpha);
    let drag = dyn_pressure * params.C_D.eval(alpha);
    let (sa, ca) = alpha.sin_cos();
    Vector6::new(-drag * ca + lift * sa, 0.0, -drag * sa - lift * ca, 0.0, 0.0, 0.0)
}

/// Lift moments equal and opposite to the Munk moments
/// `(Z_wdot - X_udot) u w` in pitch and `(X_udot - Y_vdot) u v` in yaw.
pub fn munk_cancellation(nu_r: &Vector6<f64>, hydro: &DerivedHydro) -> Vector6<f64> {
    let [xu, yv, zw, ..] = hydro.added_mass_derivatives();
    let (u, v, w) = (nu_r[0], nu_r[1], nu_r[2]);
    Vector6::new(0.0, 0.0, 0.0, 0.0, (zw - xu) * u * w, (xu - yv) * u * v)
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let h = (hi - lo) / SIMPSON_PANELS as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..SIMPSON_PANELS {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// `(int |s|s dx, int x|s|s dx)` over `[-half, half]` for the strip velocity
/// `s(x) = base + x * rate`.
///
/// The integrands are piecewise polynomials of degree <= 3 with a kink where
/// `s` changes sign, so the interval is split there and each piece is
/// integrated with composite Simpson, which is exact for cubics.
pub fn strip_integrals(base: f64, rate: f64, half: f64) -> (f64, f64) {
    let s = |x: f64| base + x * rate;
    let force = |x: f64| {
        let v = s(x);
        v.abs() * v
    };
    let moment = |x: f64| x * force(x);
    let mut cuts = vec![-half];
    if rate != 0.0 {
        let root = -base / rate;
        if root > -half && root < half {
            cuts.push(root);
        }
    }
    cuts.push(half);
    let mut f_int = 0.0;
    let mut m_int = 0.0;
    for w in cuts.windows(2) {
        f_int += simpson(force, w[0], w[1]);
        m_int += simpson(moment, w[0], w[1]);
    }
    (f_int, m_int)
}

/// Strip-theory cross-flow drag `[0, Y, Z, 0, M, N]`.
pub fn crossflow_drag(nu_r: &Vector6<f64>, params: &VehicleParams) -> Vector6<f64> {
    let (v, w, q, r) = (nu_r[1], nu_r[2], nu_r[4], nu_r[5]);
    let half = params.length / 2.0;
    let k = -0.5 * params.rho * params.diameter * params.C_d_2D;
    let (sway_f, sway_m) = strip_integrals(v, r, half);
    let (heave_f, heave_m) = strip_integrals(w, q, half);
    let (pitch, yaw) = match params.crossflow_pairing {
        CrossflowPairing::Standard => (heave_m, sway_m),
        CrossflowPairing::Swapped => (sway_m, heave_m),
    };
    Vector6::new(0.0, k * sway_f, k * heave_f, 0.0, k * pitch, k * yaw)
}
