//! Constant hydrodynamic quantities and the velocity-dependent matrices of the
//! equations of motion.

use nalgebra::{Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::vehicle::geometry::{lamb_factors, spheroid_geometry, LambFactors, Spheroid};
use crate::vehicle::kinematics::skew;
use crate::vehicle::VehicleParams;

/// Quantities derived once from [`VehicleParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedHydro {
    pub spheroid: Spheroid,
    pub lamb: LambFactors,
    pub i_x: f64,
    pub i_y: f64,
    pub i_z: f64,
    pub m_rb: Matrix6<f64>,
    /// Added mass, `diag{m k1, m k2, m k2, r44 Ix, k' Iy, k' Iy}`.
    pub m_a: Matrix6<f64>,
    pub m: Matrix6<f64>,
    pub m_inv: Matrix6<f64>,
    /// Linear damping coefficients `[X_u, Y_v, Z_w, K_p, M_q, N_r]` (all negative).
    pub lin_damping: [f64; 6],
}

impl DerivedHydro {
    pub fn new(params: &VehicleParams) -> Result<Self> {
        let spheroid = spheroid_geometry(params);
        let lamb = lamb_factors(spheroid.a, spheroid.b)?;
        let (a, b) = (spheroid.a, spheroid.b);
        let m = params.m;
        let i_x = 0.4 * m * b * b;
        let i_y = 0.2 * m * (a * a + b * b);
        let i_z = i_y;
        let (m_rb, m_a, total, m_inv) = inertia_matrix(params, &lamb, [i_x, i_y, i_z])?;
        let t = [params.T1, params.T2, params.T3, params.T4, params.T5, params.T6];
        let mut lin_damping = [0.0; 6];
        for i in 0..6 {
            lin_damping[i] = -total[(i, i)] / t[i];
        }
        Ok(Self {
            spheroid,
            lamb,
            i_x,
            i_y,
            i_z,
            m_rb,
            m_a,
            m: total,
            m_inv,
            lin_damping,
        })
    }

    /// Added-mass derivatives `[X_udot, Y_vdot, Z_wdot, K_pdot, M_qdot, N_rdot]`.
    pub fn added_mass_derivatives(&self) -> [f64; 6] {
        std::array::from_fn(|i| -self.m_a[(i, i)])
    }
}

/// `H(r) = [I, S(r)^T; 0, I]`.
pub fn h_matrix(r: &Vector3<f64>) -> Matrix6<f64> {
    let mut h = Matrix6::identity();
    h.fixed_view_mut::<3, 3>(0, 3).copy_from(&skew(r).transpose());
    h
}

/// Returns `(M_RB, M_A, M, M^-1)`.
pub fn inertia_matrix(
    params: &VehicleParams,
    lamb: &LambFactors,
    inertia: [f64; 3],
) -> Result<(Matrix6<f64>, Matrix6<f64>, Matrix6<f64>, Matrix6<f64>)> {
    let m = params.m;
    let [i_x, i_y, i_z] = inertia;
    let r_bg = Vector3::from(params.r_bG);
    let h = h_matrix(&r_bg);
    let m_cg = Matrix6::from_diagonal(&Vector6::new(m, m, m, i_x, i_y, i_z));
    let m_rb = h.transpose() * m_cg * h;
    let m_a = Matrix6::from_diagonal(&Vector6::new(
        m * lamb.k1,
        m * lamb.k2,
        m * lamb.k2,
        params.r44 * i_x,
        lamb.kprime * i_y,
        lamb.kprime * i_y,
    ));
    let total = m_rb + m_a;
    let inv = total.try_inverse().ok_or(Error::SingularInertia)?;
    Ok((m_rb, m_a, total, inv))
}

/// Rigid-body Coriolis-centripetal matrix about the body origin, driven by the
/// angular rates.
pub fn coriolis_rigid_body(nu_r: &Vector6<f64>, params: &VehicleParams, d: &DerivedHydro) -> Matrix6<f64> {
    let (p, q, r) = (nu_r[3], nu_r[4], nu_r[5]);
    let m = params.m;
    let w = Vector3::new(p, q, r);
    let iw = Vector3::new(d.i_x * p, d.i_y * q, d.i_z * r);
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 0).copy_from(&(skew(&w) * m));
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-skew(&iw)));
    let h = h_matrix(&Vector3::from(params.r_bG));
    h.transpose() * c * h
}

/// Added-mass Coriolis-centripetal matrix; skew-symmetric by construction.
pub fn coriolis_added_mass(nu_r: &Vector6<f64>, d: &DerivedHydro) -> Matrix6<f64> {
    let [xu, yv, zw, kp, mq, nr] = d.added_mass_derivatives();
    let (u, v, w, p, q, r) = (nu_r[0], nu_r[1], nu_r[2], nu_r[3], nu_r[4], nu_r[5]);
    let lin = Vector3::new(xu * u, yv * v, zw * w);
    let ang = Vector3::new(kp * p, mq * q, nr * r);
    // C_A = [0, -S(A11 v1); -S(A11 v1), -S(A22 v2)] with A = -diag(derivatives)
    let s_lin = skew(&lin);
    let s_ang = skew(&ang);
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&s_lin);
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&s_lin);
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&s_ang);
    c
}

pub fn coriolis_matrix(nu_r: &Vector6<f64>, params: &VehicleParams, d: &DerivedHydro) -> Matrix6<f64> {
    coriolis_rigid_body(nu_r, params, d) + coriolis_added_mass(nu_r, d)
}

pub fn relative_speed(nu_r: &Vector6<f64>) -> f64 {
    (nu_r[0] * nu_r[0] + nu_r[1] * nu_r[1] + nu_r[2] * nu_r[2]).sqrt()
}

/// Diagonal linear damping; surge and sway fade as `exp(-3 U_r)`.
pub fn damping_matrix(nu_r: &Vector6<f64>, d: &DerivedHydro) -> Matrix6<f64> {
    let fade = (-3.0 * relative_speed(nu_r)).exp();
    let [xu, yv, zw, kp, mq, nr] = d.lin_damping;
    Matrix6::from_diagonal(&Vector6::new(-xu * fade, -yv * fade, -zw, -kp, -mq, -nr))
}

/// Gravity/buoyancy moments of a neutrally buoyant vehicle.
pub fn restoring_forces(eta: &Vector6<f64>, params: &VehicleParams) -> Vector6<f64> {
    let [xg, yg, zg] = params.r_bG;
    let w = params.m * params.g0;
    let (phi, theta) = (eta[3], eta[4]);
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    Vector6::new(
        0.0,
        0.0,
        0.0,
        zg * w * cth * sphi - yg * w * cth * cphi,
        zg * w * sth + xg * w * cth * cphi,
        xg * w * cth * sphi - yg * w * sth,
    )
}
