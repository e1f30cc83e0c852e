//! Drives the `traplab` binary end to end.

use std::process::Command;

fn traplab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_traplab")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn predict_dyadic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = traplab(&["predict", "--family", "dyadic", "--m", "3", "--out", out]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "resolvent_loss = 9/5, smoothing_loss = 9/10 (+ε)");
}

#[test]
fn predict_alternating() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = traplab(&["predict", "--family", "alternating", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("25/14 (= 50/28)"), "{stdout}");
}

#[test]
fn four_h_points_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = traplab(&["resolvent-sweep", "--h-count", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn unknown_config_field_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"h_cout": 5}"#).unwrap();
    let (code, _, _) = traplab(&["feasibility", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn powerlaw_predicate_failure_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["predict", "--family", "powerlaw", "--m", "3", "--k", "9", "--out", dir.path().to_str().unwrap()];
    let (code, stdout, _) = traplab(&args);
    assert_eq!(code, 1);
    assert!(stdout.contains("gluing"));
}

#[test]
fn sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let quartic = root.join("quartic");
    let args = [
        "resolvent-sweep",
        "--target",
        "quartic-max",
        "--out",
        quartic.to_str().unwrap(),
    ];
    let (code, stdout, stderr) = traplab(&args);
    assert_eq!(code, 0, "{stdout}{stderr}");
    for f in ["resolved-config.json", "samples.csv", "fit.json", "verdict.json", "plot.svg"] {
        assert!(quartic.join(f).exists(), "{f}");
    }
    let header = std::fs::read_to_string(quartic.join("samples.csv")).unwrap();
    assert!(header.starts_with("family,m,k,h,z,n,dx,cap,norm,converged\n"));

    let (code, stdout, _) = traplab(&["report", root.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("| quartic | resolvent_sweep |"));
    let first = std::fs::read(root.join("report.md")).unwrap();
    traplab(&["report", root.to_str().unwrap()]);
    assert_eq!(first, std::fs::read(root.join("report.md")).unwrap());

    std::fs::create_dir_all(root.join("broken")).unwrap();
    let (code, stdout, _) = traplab(&["report", root.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("ERROR"));
}

#[test]
fn thread_cap_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_traplab"))
        .env("TRAPLAB_THREADS", "1")
        .args(["feasibility", "--family", "alternating", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
