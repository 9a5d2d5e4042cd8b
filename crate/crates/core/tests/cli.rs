use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spin_orbit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spin-orbit"))
        .args(args)
        .env_remove("SPIN_ORBIT_WORKERS")
        .output()
        .expect("binary runs")
}

fn out_flag(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn expectations_default_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = spin_orbit(&["expectations", "--out-dir", &out_flag(dir.path())]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("expectations.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,t_over_Tls,sx,sy,sz,lx,ly,lz,jx,jy,jz,norm"
    );
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 251);
    let first: Vec<f64> = rows[0].iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[4] + 0.5).abs() < 1e-14);
    let last: f64 = rows[250][1].parse().unwrap();
    assert!((last - 0.5).abs() < 1e-14);
    for r in &rows {
        let norm: f64 = r[11].parse().unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_time_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = spin_orbit(&[
        "expectations",
        "--n-times",
        "1",
        "--out-dir",
        &out_flag(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("expectations.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn density_snapshots_and_manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_flag(dir.path());
    let out = spin_orbit(&["density", "--n-r", "24", "--n-phi", "64", "--out-dir", &d]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 9);
    let tls = manifest["t_ls"].as_f64().unwrap();
    assert!((tls - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    for key in [
        "kappa",
        "omega0",
        "omega_ls",
        "r_cl",
        "l_max",
        "n_theta",
        "r_max",
        "snapshot_times",
    ] {
        assert!(!manifest[key].is_null(), "{key}");
    }
    let first = fs::read_to_string(dir.path().join(files[0].as_str().unwrap())).unwrap();
    assert_eq!(first.lines().next().unwrap(), "r,phi,d_up,d_down,d_total");
    let rows = data_rows(&first);
    assert_eq!(rows.len(), 24 * 64);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));

    let again = tempfile::tempdir().unwrap();
    let manifest_path = dir.path().join("manifest.json");
    let out = spin_orbit(&[
        "density",
        "--config",
        manifest_path.to_str().unwrap(),
        "--out-dir",
        &out_flag(again.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in files {
        let name = f.as_str().unwrap();
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(again.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn maxima_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = spin_orbit(&[
        "maxima",
        "--n-times",
        "5",
        "--out-dir",
        &out_flag(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("maxima.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,t_over_Tls,component,theta_star,phi_star,value"
    );
    let rows = data_rows(&csv);
    // the up component is empty at t = 0
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][2], "down");
    assert_eq!(rows[1][2], "up");
    let down_only = tempfile::tempdir().unwrap();
    let out = spin_orbit(&[
        "maxima",
        "--component",
        "down",
        "--n-times",
        "3",
        "--out-dir",
        &out_flag(down_only.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let down_rows = data_rows(&fs::read_to_string(down_only.path().join("maxima.csv")).unwrap());
    assert_eq!(down_rows.len(), 3);
    assert!(down_rows.iter().all(|r| r[2] == "down"));
}

#[test]
fn check_report_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = spin_orbit(&["check", "--out-dir", &out_flag(dir.path())]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 6);
    for c in checks {
        for key in ["name", "measured", "threshold", "passed"] {
            assert!(!c[key].is_null(), "{key}");
        }
    }

    let bad = tempfile::tempdir().unwrap();
    let out = spin_orbit(&[
        "check",
        "--corrupt-kappa-sign",
        "--out-dir",
        &out_flag(bad.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(bad.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], Value::Bool(false));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = spin_orbit(&[
        "expectations",
        "--n-times",
        "2",
        "--out-dir",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = spin_orbit(&[
        "expectations",
        "--n-mean",
        "-1",
        "--out-dir",
        &out_flag(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_mean": 4, "bogus": 1}"#).unwrap();
    let out = spin_orbit(&[
        "expectations",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        &out_flag(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // clap rejects the pair before any work happens
    let out = spin_orbit(&["expectations", "--ratio", "2", "--kappa", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn workers_do_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path, w: &str| {
        vec![
            "expectations".to_string(),
            "--n-mean".into(),
            "20".into(),
            "--workers".into(),
            w.into(),
            "--out-dir".into(),
            out_flag(d),
        ]
    };
    let run = |v: Vec<String>| spin_orbit(&v.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run(args(a.path(), "1")).status.code(), Some(0));
    assert_eq!(run(args(b.path(), "4")).status.code(), Some(0));
    assert_eq!(
        fs::read(a.path().join("expectations.csv")).unwrap(),
        fs::read(b.path().join("expectations.csv")).unwrap()
    );
}
