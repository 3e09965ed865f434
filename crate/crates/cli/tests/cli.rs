use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use ultrapar::io::{read_field, read_trajectory, CONFIG_COPY, INDEX_FILE};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn ultrapar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultrapar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn zero_config_gives_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero");
    let cfg = config("zero.toml");
    for mode in ["entropy", "impulsive"] {
        let o = ultrapar(&["run", path(&cfg), "--mode", mode, "--out", path(&out)]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let traj = read_trajectory(&out).unwrap();
        assert!(traj
            .snapshots
            .iter()
            .all(|s| s.field.values.iter().all(|&v| v == 0.0)));
        assert!(out.join(CONFIG_COPY).exists());
        assert!(out.join(INDEX_FILE).exists());
    }
    let snap = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "upkf"))
        .unwrap();
    assert!(read_field(&snap).unwrap().values.iter().all(|&v| v == 0.0));
}

#[test]
fn invalid_config_exits_one_with_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("zero.toml"))
        .unwrap()
        .replace("a = \"lambda^2/2\"", "a = \"lambda^2/2 + 0.3\"");
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, text).unwrap();
    let o = ultrapar(&[
        "run",
        path(&bad),
        "--mode",
        "entropy",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("a(0) = 0.3"), "{err}");
}

#[test]
fn missing_file_exits_one() {
    let o = ultrapar(&["validate-flux", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn burgers_demo_runs_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("burgers.toml");
    let imp = dir.path().join("imp");
    let start = Instant::now();
    let o = ultrapar(&[
        "run",
        path(&cfg),
        "--mode",
        "impulsive",
        "--out",
        path(&imp),
    ]);
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("sup|u|"));

    let report = dir.path().join("report.csv");
    let o = ultrapar(&[
        "verify",
        path(&cfg),
        "--traj",
        path(&imp),
        "--traj2",
        path(&imp),
        "--report",
        path(&report),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let csv = std::fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("check,measured,bound,tolerance,pass,context-hash"));
    for check in [
        "max_principle",
        "jump_pointwise",
        "entropy_residual",
        "bln",
        "stability",
    ] {
        let line = csv
            .lines()
            .find(|l| l.starts_with(&format!("{check},")))
            .unwrap_or_else(|| panic!("{check} missing"));
        assert!(line.contains(",true,"), "{line}");
    }
}

#[test]
fn failed_check_exits_three() {
    // linear flux has no genuine nonlinearity
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("zero.toml"))
        .unwrap()
        .replace("a = \"lambda^2/2\"", "a = \"2*lambda\"");
    let linear = dir.path().join("linear.toml");
    std::fs::write(&linear, text).unwrap();
    let o = ultrapar(&["validate-flux", path(&linear)]);
    assert_eq!(o.status.code(), Some(3));
    let o = ultrapar(&["validate-flux", path(&config("burgers.toml"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("mu(delta)"));
}

#[test]
fn epsilon_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = ultrapar(&[
        "sweep",
        path(&config("burgers.toml")),
        "--param",
        "epsilon",
        "--values",
        "0.04,0.02,0.01",
        "--out",
        path(&out),
        "--jobs",
        "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("epsilon,error"));
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.contains("epsilon_cauchy,"));
}

#[test]
fn gamma_values_outside_range_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = ultrapar(&[
        "sweep",
        path(&config("burgers.toml")),
        "--param",
        "gamma",
        "--values",
        "0.05,0.1",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
