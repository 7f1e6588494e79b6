use std::path::Path;
use std::process::Command;

fn soco(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_soco"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn run_writes_report_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ramp");
    let out_s = out.to_str().unwrap();
    let o = soco(&[
        "run", "--algo", "robd", "--instance", "ramp", "--m", "0.25", "--out", out_s,
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["ratio"].as_f64().unwrap() >= 1.0);
    assert!(report["runtime_sec"].as_f64().unwrap() >= 0.0);

    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert!(csv.starts_with("t,x_joined_by_semicolons,hit,move,cum_alg,cum_oracle\n"));
    assert!(!csv.contains('\r'));
    let json = std::fs::read_to_string(out.with_extension("json")).unwrap();
    let on_disk: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(on_disk["ratio"], report["ratio"]);
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = soco(&[
            "run", "--algo", "obd", "--gamma", "1", "--instance", "random-quadratic",
            "--m", "0.5", "--T", "40", "--seed", "7", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.with_extension("csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"algo":"robd","instance":"ramp","m":0.25}"#).unwrap();
    let with_m = |extra: &[&str]| -> f64 {
        let mut args = vec!["--config", cfg.to_str().unwrap(), "run"];
        args.extend_from_slice(extra);
        let o = soco(&args);
        assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        report["config"]["m"].as_f64().unwrap()
    };
    assert_eq!(with_m(&[]), 0.25);
    assert_eq!(with_m(&["--m", "0.5"]), 0.5);
}

#[test]
fn sweep_emits_slope_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = soco(&[
        "sweep", "--algo", "robd", "--instance", "ramp",
        "--m-grid", "1e-3,3e-3,1e-2,3e-2,1e-1", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = report["slope"].as_f64().unwrap();
    assert!(slope < 0.0, "slope {slope}");
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 6, "header plus one row per grid point");
}

#[test]
fn invalid_config_fails_with_message() {
    let o = soco(&["run", "--algo", "nope", "--instance", "ramp", "--m", "0.25"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("error"), "stderr: {err}");
    assert!(Path::new(env!("CARGO_BIN_EXE_soco")).exists());
}
