use std::path::Path;

use deepc_auv::experiments::{compare, run_scenario, write_outputs, MetricsReport, Mode, Scenario, Winner};

fn short_pid(mode: &str) -> String {
    let section = match mode {
        "path" => r#""path": {"waypoints": [[0, 0, 10], [200, 0, 15]], "r_switch": 10.0}"#,
        _ => {
            r#""setpoint": {
                "heading": {"target": 20.0, "step_time": 2.0, "omega_n": 0.1},
                "depth": {"target": 5.0, "step_time": 2.0, "omega_n": 0.05}
            }"#
        }
    };
    format!(
        r#"{{"schema_version": 1, "name": "short_{mode}", "controller": "pid", "mode": "{mode}",
            "duration": 20.0, "seed": 5, {section}}}"#
    )
}

#[test]
fn shipped_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert_eq!(n, 8);
}

#[test]
fn parse_errors_name_the_field() {
    let text = short_pid("setpoint").replace(r#""omega_n": 0.1"#, r#""omega_n": 0.1, "gain": 2"#);
    let err = Scenario::from_json(&text).unwrap_err().to_string();
    assert!(err.contains("setpoint.heading") && err.contains("gain"), "{err}");

    let text = short_pid("setpoint").replace(r#""duration": 20.0"#, r#""duration": "long""#);
    let err = Scenario::from_json(&text).unwrap_err().to_string();
    assert!(err.contains("duration"), "{err}");
}

#[test]
fn mode_must_match_its_section() {
    let text = short_pid("path").replace(r#""mode": "path""#, r#""mode": "setpoint""#);
    let err = Scenario::from_json(&text).unwrap_err().to_string();
    assert!(err.contains("setpoint"), "{err}");
    let text = short_pid("setpoint").replace(r#""schema_version": 1"#, r#""schema_version": 9"#);
    assert!(Scenario::from_json(&text).is_err());
}

#[test]
fn missing_dataset_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = short_pid("setpoint")
        .replace(r#""controller": "pid""#, r#""controller": "deepc""#)
        .replace(r#""seed": 5,"#, r#""seed": 5, "deepc": {"data": {"heading": "nowhere.csv"}},"#);
    let path = dir.path().join("s.json");
    std::fs::write(&path, text).unwrap();
    let err = Scenario::load(&path).unwrap_err().to_string();
    assert!(err.contains("nowhere.csv"), "{err}");
}

#[test]
fn setpoint_run_reports_all_channels() {
    let s = Scenario::from_json(&short_pid("setpoint")).unwrap();
    let out = run_scenario(&s).unwrap();
    assert!(out.error.is_none());
    assert_eq!(out.log.rows().len(), 401);
    let m = &out.metrics;
    assert_eq!(m.mode, Mode::Setpoint);
    for v in [m.psi_rmse, m.z_rmse, m.theta_rmse, m.z_final_max_error, m.z_overshoot] {
        assert!(v.is_some_and(f64::is_finite), "{m:?}");
    }
    assert!(m.waypoint_distances.is_none());
}

#[test]
fn path_run_has_no_depth_metrics() {
    let s = Scenario::from_json(&short_pid("path")).unwrap();
    let out = run_scenario(&s).unwrap();
    let m = &out.metrics;
    assert!(m.z_rmse.is_none());
    let d = m.waypoint_distances.as_ref().unwrap();
    assert_eq!(d.len(), 2);
    assert_eq!(d[0], 0.0);
}

#[test]
fn outputs_round_trip_and_compare() {
    let a = run_scenario(&Scenario::from_json(&short_pid("setpoint")).unwrap()).unwrap();
    let b = run_scenario(&Scenario::from_json(&short_pid("path")).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&a, dir.path()).unwrap();
    assert_eq!(MetricsReport::load(&files.metrics).unwrap(), a.metrics);
    let csv = std::fs::read_to_string(&files.csv).unwrap();
    assert_eq!(csv.lines().count(), 402);

    let rows = compare(&a.metrics, &b.metrics);
    let z = rows.iter().find(|r| r.channel == "z_rmse").unwrap();
    assert_eq!(z.winner, Winner::Na);
    let same = compare(&a.metrics, &a.metrics);
    assert!(same.iter().all(|r| r.winner == Winner::Tie));
}
