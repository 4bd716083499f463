use std::path::Path;
use std::process::{Command, Output};

fn aircomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aircomp")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = aircomp(&[flag]);
        assert_eq!(out.status.code(), Some(0), "{flag}");
        assert!(!out.stdout.is_empty());
    }
    let out = aircomp(&["sweep", "--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["sweep", "--mode", "inside-out"],
        vec!["sweep", "--variant", "neither"],
        vec!["sweep", "--iters", "many"],
        vec!["sweep", "--config", "/nonexistent/config.json"],
        vec!["sweep", "--threads", "0"],
    ] {
        let out = aircomp(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"network": {"lambda": 0.05}}"#).unwrap();
    assert_eq!(aircomp(&["sweep", "--config", path(&cfg)]).status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_cfg = dir.path().join("from-config");
    let out_flag = dir.path().join("from-flag");
    let text = format!(
        r#"{{
  "network": {{"lambda": 0.05, "radius": 10.0, "alpha": 2.1, "epsilon": 1.0, "rician_b": 15.0,
               "snr_db": 30.0, "noise_power": 1.0, "wavelength": 0.3}},
  "sweep": {{"parameter": "radius", "from": 10.0, "to": 20.0, "steps": 3, "log_scale": false}},
  "mc": {{"iters": 500, "seed": 4, "mode": "clamp"}},
  "eta_policy": {{"fixed": 10.0}},
  "variant": "both",
  "output_dir": {:?}
}}"#,
        path(&out_cfg)
    );
    std::fs::write(&cfg, text).unwrap();

    let out = aircomp(&["sweep", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_cfg.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("10")));

    let out = aircomp(&[
        "sweep",
        "--config",
        path(&cfg),
        "--seed",
        "9",
        "--variant",
        "printed",
        "--out",
        path(&out_flag),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let meta = std::fs::read_to_string(out_flag.join("run.json")).unwrap();
    assert!(meta.contains("\"seed\": 9"));
    assert!(meta.contains("\"variant\": \"printed\""));
    assert!(meta.contains("\"iters\": 500"));
    let csv = std::fs::read_to_string(out_flag.join("results.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("")));
}

#[test]
fn numeric_failure_exits_two() {
    // a disc this sparse has no devices in any layout
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let text = r#"{
  "network": {"lambda": 1e-9, "radius": 2.0, "alpha": 2.1, "epsilon": 1.0, "rician_b": 15.0,
              "p_max": 1000.0, "noise_power": 1.0, "wavelength": 0.3},
  "sweep": {"parameter": "eta", "from": 1.0, "to": 2.0, "steps": 2, "log_scale": false},
  "mc": {"iters": 20, "seed": 1, "mode": "clamp"},
  "eta_policy": {"fixed": 1.0},
  "variant": "rederived",
  "output_dir": "unused"
}"#;
    std::fs::write(&cfg, text).unwrap();
    let out = aircomp(&["sweep", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn optimal_radius_and_eta_report_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = aircomp(&[
        "optimal-radius",
        "--r-min",
        "5",
        "--r-max",
        "20",
        "--variant",
        "rederived",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("R_opt"));
    let grid = std::fs::read_to_string(dir.path().join("radius_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 17);
    assert!(dir.path().join("radius_report.json").exists());

    let out = aircomp(&["eta-report", "--points", "25", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let curve = std::fs::read_to_string(dir.path().join("eta_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 26);
    assert!(String::from_utf8_lossy(&out.stdout).contains("moment term"));

    let out = aircomp(&["optimal-radius", "--r-min", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repeated_sweeps_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out_dir = dir.path().join(name);
        let out = aircomp(&[
            "sweep",
            "--iters",
            "1000",
            "--seed",
            "5",
            "--threads",
            threads,
            "--out",
            path(&out_dir),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(out_dir.join("results.csv")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "3"));
    assert_eq!(a, run("c", "3"));
}
