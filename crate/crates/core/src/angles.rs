//! Angle helpers shared by the controllers, guidance and metrics.

use std::f64::consts::{PI, TAU};

/// Maps an angle to the interval (-pi, pi].
pub fn ssa(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Returns the representative of `target` closest to `reference`, so that
/// the difference between the two never exceeds pi in magnitude.
pub fn unwrap_near(target: f64, reference: f64) -> f64 {
    reference + ssa(target - reference)
}

pub fn deg(rad: f64) -> f64 {
    rad.to_degrees()
}

pub fn rad(deg: f64) -> f64 {
    deg.to_radians()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ssa_range() {
        assert!((ssa(rad(359.0)) - rad(-1.0)).abs() < 1e-12);
        assert!((ssa(rad(-181.0)) - rad(179.0)).abs() < 1e-12);
        assert_eq!(ssa(PI), PI);
        assert_eq!(ssa(-PI), PI);
        assert_eq!(ssa(0.0), 0.0);
    }

    #[test]
    fn unwrap_keeps_local_branch() {
        let r = unwrap_near(rad(1.0), rad(359.0));
        assert!((r - rad(361.0)).abs() < 1e-12);
    }
}
