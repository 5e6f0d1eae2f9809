use std::path::Path;
use std::process::{Command, Output};

fn auvctl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auvctl"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

const SCENARIO: &str = r#"{"schema_version": 1, "name": "cli_pid", "controller": "pid", "mode": "setpoint",
    "duration": 10.0, "setpoint": {
        "heading": {"target": 10.0, "step_time": 1.0, "omega_n": 0.1},
        "depth": {"target": 2.0, "step_time": 1.0, "omega_n": 0.05}}}"#;

#[test]
fn run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), SCENARIO).unwrap();
    let out = auvctl(&["run", "--scenario", "s.json", "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/cli_pid.csv").exists());
    let out = auvctl(
        &["compare", "out/cli_pid.metrics.json", "out/cli_pid.metrics.json"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("psi_rmse") && text.contains("tie"), "{text}");
}

#[test]
fn bad_input_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = auvctl(&["run", "--scenario", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), SCENARIO.replace("\"duration\"", "\"durration\"")).unwrap();
    let out = auvctl(&["run", "--scenario", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("durration"));
}

#[test]
fn divergence_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = SCENARIO.replace(
        r#""duration": 10.0,"#,
        r#""duration": 10.0, "initial": {"u": 200.0},"#,
    );
    std::fs::write(dir.path().join("fast.json"), text).unwrap();
    let out = auvctl(&["run", "--scenario", "fast.json", "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    // the partial trajectory is still written
    assert!(dir.path().join("out/cli_pid.csv").exists());
}

#[test]
fn check_data_flags_unexcited_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,delta_r,psi\n");
    for k in 0..400 {
        csv.push_str(&format!("{},0,{}\n", k as f64 * 0.05, k as f64 * 1e-3));
    }
    std::fs::write(dir.path().join("flat.csv"), csv).unwrap();
    std::fs::write(
        dir.path().join("flat.json"),
        r#"{"inputs": ["delta_r"], "outputs": ["psi"], "dt": 0.05, "seed": 0}"#,
    )
    .unwrap();
    let out = auvctl(&["check-data", "flat.csv", "--t-ini", "4", "--t-fut", "4", "--columns", "40"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("rank"));
}
