use nalgebra::{Matrix3, Vector3, Vector6};

use crate::error::{Error, Result};

/// Pitch margin from +-pi/2 inside which the Euler-rate map is refused.
pub const GIMBAL_MARGIN: f64 = 1e-3;

/// Cross-product matrix: `skew(a) * b == a.cross(b)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Body-to-NED rotation (zyx convention).
pub fn rotation_matrix(phi: f64, theta: f64, psi: f64) -> Matrix3<f64> {
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let (spsi, cpsi) = psi.sin_cos();
    Matrix3::new(
        cpsi * cth,
        -spsi * cphi + cpsi * sth * sphi,
        spsi * sphi + cpsi * cphi * sth,
        spsi * cth,
        cpsi * cphi + sphi * sth * spsi,
        -cpsi * sphi + sth * spsi * cphi,
        -sth,
        cth * sphi,
        cth * cphi,
    )
}

/// Maps body angular rates to Euler-angle rates.
pub fn angular_rate_matrix(phi: f64, theta: f64) -> Result<Matrix3<f64>> {
    if theta.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_MARGIN {
        return Err(Error::Gimbal { theta });
    }
    let (sphi, cphi) = phi.sin_cos();
    let (tth, cth) = (theta.tan(), theta.cos());
    Ok(Matrix3::new(
        1.0,
        sphi * tth,
        cphi * tth,
        0.0,
        cphi,
        -sphi,
        0.0,
        sphi / cth,
        cphi / cth,
    ))
}

/// `eta_dot = J(eta) nu`.
pub fn kinematics(eta: &Vector6<f64>, nu: &Vector6<f64>) -> Result<Vector6<f64>> {
    let r = rotation_matrix(eta[3], eta[4], eta[5]);
    let t = angular_rate_matrix(eta[3], eta[4])?;
    let lin = r * nu.fixed_rows::<3>(0);
    let ang = t * nu.fixed_rows::<3>(3);
    Ok(Vector6::new(lin.x, lin.y, lin.z, ang.x, ang.y, ang.z))
}
