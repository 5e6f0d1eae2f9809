//! Spheroid approximation of the hull and the Lamb added-mass factors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vehicle::VehicleParams;

/// Semi-axes of the equivalent prolate spheroid (b = c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spheroid {
    pub a: f64,
    pub b: f64,
}

/// Volume needed for neutral buoyancy, expressed as the product a*b^2.
fn mass_volume_product(params: &VehicleParams) -> f64 {
    params.m / (4.0 / 3.0 * PI * params.rho)
}

/// Residuals of the two spheroid relations `L^2/a^2 + 2 D^2/b^2 = 1` and
/// `m = 4/3 pi rho a b^2` (the latter normalised by m).
pub fn spheroid_residuals(params: &VehicleParams, a: f64, b: f64) -> (f64, f64) {
    let l = params.length;
    let d = params.diameter;
    let envelope = l * l / (a * a) + 2.0 * d * d / (b * b) - 1.0;
    let mass = (4.0 / 3.0 * PI * params.rho * a * b * b - params.m) / params.m;
    (envelope, mass)
}

/// Equivalent spheroid used by the vehicle model: the semi-axes keep the hull
/// aspect ratio `a/b = L/D` and are scaled uniformly until the displaced mass
/// equals the vehicle mass.
pub fn spheroid_geometry(params: &VehicleParams) -> Spheroid {
    let a0 = params.length / 2.0;
    let b0 = params.diameter / 2.0;
    let scale = (mass_volume_product(params) / (a0 * b0 * b0)).cbrt();
    Spheroid {
        a: scale * a0,
        b: scale * b0,
    }
}

/// Solves the coupled relations `L^2/a^2 + 2 D^2/b^2 = 1`, `m = 4/3 pi rho a b^2`
/// for (a, b).
///
/// Eliminating a through the mass relation leaves a scalar equation in b whose
/// left side has a single interior minimum; both branches are searched and the
/// more slender root (largest a/b) is returned. If the minimum lies above zero
/// the pair has no real solution and the smallest attainable residual is
/// reported in the error.
pub fn spheroid_from_envelope(params: &VehicleParams) -> Result<Spheroid> {
    let k = mass_volume_product(params);
    let l2 = params.length * params.length;
    let d2 = params.diameter * params.diameter;
    // f(b) = L^2 b^4 / k^2 + 2 D^2 / b^2 - 1 with a = k / b^2
    let f = |b: f64| l2 * b.powi(4) / (k * k) + 2.0 * d2 / (b * b) - 1.0;
    // df/db = 0  ->  b^6 = D^2 k^2 / L^2
    let b_star = (d2 * k * k / l2).powf(1.0 / 6.0);
    let f_min = f(b_star);
    if f_min > 0.0 {
        let a_star = k / (b_star * b_star);
        let (envelope, mass) = spheroid_residuals(params, a_star, b_star);
        return Err(Error::SpheroidNoRoot { envelope, mass });
    }
    // f is decreasing on (0, b_star]; the small-b root gives the slender body.
    let mut lo = b_star * 1e-6;
    while f(lo) <= 0.0 {
        lo *= 0.5;
    }
    let mut hi = b_star;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    Ok(Spheroid { a: k / (b * b), b })
}

/// Lamb's k-factors of a prolate spheroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambFactors {
    pub e: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub k1: f64,
    pub k2: f64,
    pub kprime: f64,
}

pub fn lamb_factors(a: f64, b: f64) -> Result<LambFactors> {
    if !(a > b && b > 0.0) {
        return Err(Error::NotProlate { a, b });
    }
    let e = (1.0 - (b / a).powi(2)).sqrt();
    let e2 = e * e;
    let e3 = e2 * e;
    // ln((1+e)/(1-e)) = 2 atanh(e), accurate for small e
    let log_term = 2.0 * e.atanh();
    let alpha0 = 2.0 * (1.0 - e2) / e3 * (0.5 * log_term - e);
    let beta0 = 1.0 / e2 - (1.0 - e2) / (2.0 * e3) * log_term;
    let k1 = alpha0 / (2.0 - alpha0);
    let k2 = beta0 / (2.0 - beta0);
    let diff = beta0 - alpha0;
    let kprime = e2 * e2 * diff / ((2.0 - e2) * (2.0 * e2 - (2.0 - e2) * diff));
    Ok(LambFactors {
        e,
        alpha0,
        beta0,
        k1,
        k2,
        kprime,
    })
}
