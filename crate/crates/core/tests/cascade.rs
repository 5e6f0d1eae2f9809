mod common;

use common::{random_matrix, random_vector, rng, Lti};
use deepc_auv::cascade::{interpolated_reference, Cascade, ThetaHold};
use deepc_auv::deepc::{partition, DataMatrixKind, DeePCConfig, DeepcController, QpSettings};
use nalgebra::DVector;

fn controller(t_ini: usize, n: usize, seed: u64) -> DeepcController {
    let sys = Lti::siso();
    let mut g = rng(seed);
    let u = random_matrix(&mut g, 400, 1);
    let (y, _) = sys.rollout(&random_vector(&mut g, sys.n()), &u);
    let blocks = partition(&u, &y, t_ini, n, DataMatrixKind::Hankel, None).unwrap();
    let cfg = DeePCConfig {
        T_ini: t_ini,
        T_fut: n,
        T_d: 1,
        lambda_ini: 1e5,
        lambda_g: 1e-2,
        Q: 10.0,
        R: 1.0,
        u_min: None,
        u_max: None,
        y_min: None,
        y_max: None,
        constrained_outputs: None,
        kind: DataMatrixKind::Hankel,
        u_scale: 1.0,
        y_scale: 1.0,
    };
    DeepcController::new(blocks, cfg, QpSettings::default()).unwrap()
}

fn cascade(hold: ThetaHold) -> Cascade {
    Cascade::new(controller(5, 6, 1), controller(4, 5, 2), 10, hold).unwrap()
}

#[test]
fn outer_window_holds_every_r_f_th_sample() {
    let mut c = cascade(ThetaHold::Interp);
    c.reset(0.0, 0.0);
    for k in 0..40 {
        c.record(k, k as f64, 100.0 + k as f64);
    }
    // at the update of tick 40 the window ends with ticks 39, 29, 19, 9
    let z: Vec<f64> = c.outer().y_window().iter().map(|v| v[0]).collect();
    assert_eq!(z, vec![109.0, 119.0, 129.0, 139.0]);
    let theta: Vec<f64> = c.outer().u_window().iter().map(|v| v[0]).collect();
    assert_eq!(theta, vec![9.0, 19.0, 29.0, 39.0]);
}

#[test]
fn outer_step_rejects_off_grid_ticks() {
    let mut c = cascade(ThetaHold::Interp);
    c.reset(0.0, 0.0);
    assert!(c.outer_step(7, &DVector::from_element(5, 1.0)).is_err());
}

fn command_profile(hold: ThetaHold) -> Vec<f64> {
    let mut c = cascade(hold);
    c.reset(0.0, 0.0);
    let mut out = Vec::new();
    for k in 0..60 {
        if k > 0 && k % 10 == 0 {
            let target = if k < 30 { 1.0 } else { -1.0 };
            c.outer_step(k, &DVector::from_element(5, target)).unwrap();
        }
        out.push(c.theta_d_at(k));
        c.record(k, 0.0, 0.0);
    }
    out
}

#[test]
fn interpolated_command_is_continuous() {
    let interp = command_profile(ThetaHold::Interp);
    let zoh = command_profile(ThetaHold::Zoh);
    let biggest_step = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    // the ramp spreads each update over r_f ticks
    assert!(biggest_step(&interp) * 5.0 < biggest_step(&zoh), "{interp:?} {zoh:?}");
    // both reach the same commands at the end of each ramp
    for k in [20, 30, 40, 50] {
        assert!((interp[k] - zoh[k - 1]).abs() < 1e-12, "tick {k}");
    }
}

#[test]
fn inner_reference_follows_the_ramp() {
    let r = interpolated_reference(0.0, 1.0, 10, 8, 4);
    for (a, b) in r.iter().zip([0.9, 1.0, 1.1, 1.2]) {
        assert!((a - b).abs() < 1e-12, "{r}");
    }
}
