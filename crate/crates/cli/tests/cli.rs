use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn faberlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faberlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FABERLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn gen_circle_monomial() {
    let dir = TempDir::new().unwrap();
    let o = faberlab(
        &["gen", "--curve", "circle", "--p", "2", "--n", "5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("faber_plus_5.csv")).unwrap();
    assert_eq!(data_rows(&csv), vec!["5,1,0"]);
    assert_eq!(stdout(&o), csv);
    let hash = csv
        .lines()
        .next()
        .unwrap()
        .strip_prefix("# config_sha256=")
        .unwrap();
    let rep = read_json(&dir.path().join("faber_plus_5.json"));
    assert_eq!(rep["config_hash"], hash);
    assert_eq!(rep["degree"], 5);
}

#[test]
fn gen_minus_side_on_circle() {
    let dir = TempDir::new().unwrap();
    let o = faberlab(
        &["gen", "--curve", "circle", "--n", "3", "--side", "minus"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("faber_minus_3.csv")).unwrap();
    assert_eq!(data_rows(&csv), vec!["-3,0,-1"]);
}

#[test]
fn check_weight_example() {
    let dir = TempDir::new().unwrap();
    let o = faberlab(
        &[
            "check",
            "--weight",
            r#"{"points":[3.14],"alphas":[0.5],"p":2}"#,
            "--curve",
            "circle",
            "--nodes",
            "512",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let rep = read_json(&dir.path().join("check.json"));
    assert_eq!(rep["in_class"], true);
    assert_eq!(rep["window_ok"], true);
    assert!((rep["betas"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(rep["carleson"]["is_regular"], true);
    assert_eq!(rep["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn strict_violation_exits_three() {
    let dir = TempDir::new().unwrap();
    let args = [
        "check",
        "--weight",
        r#"{"points":[3.14],"alphas":[2.0],"p":2}"#,
        "--curve",
        "circle",
        "--nodes",
        "256",
    ];
    let loose = faberlab(&args, dir.path());
    assert_eq!(loose.status.code(), Some(0));
    let mut strict: Vec<&str> = args.to_vec();
    strict.push("--strict");
    let o = faberlab(&strict, dir.path());
    assert_eq!(o.status.code(), Some(3));
    let v = read_json(&dir.path().join("violations.json"));
    assert_eq!(v["status"], "violation");
    assert!(!v["violations"].as_array().unwrap().is_empty());
    let line: Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!(line["violations"], v["violations"]);
}

#[test]
fn strict_phase_outside_window() {
    let dir = TempDir::new().unwrap();
    let o = faberlab(
        &[
            "study",
            "--phase-alpha",
            "0.3",
            "--curve",
            "ellipse:2,1",
            "--nodes",
            "256",
            "--m-max",
            "10",
            "--strict",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["gen", "--curve", "ellipse:0,1", "--n", "3"],
        vec!["gen", "--curve", "square", "--n", "3"],
        vec!["gen", "--curve", "circle"],
        vec!["gen", "--n", "3", "--weight", r#"{"p":3}"#, "--p", "2"],
        vec!["study", "--nodes", "1000"],
        vec!["expand", "--f", "sample:runge:0.5"],
        vec![
            "solve",
            "--pair",
            r#"{"kind":"unit"}"#,
            "--phase-alpha",
            "0.1",
        ],
        vec!["gen", "--n", "2", "--p", "1"],
    ] {
        let o = faberlab(&args, dir.path());
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_faberlab"))
        .args(["gen", "--n", "1", "--out"])
        .arg(dir.path())
        .env("FABERLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extraction_failure_exits_four() {
    let dir = TempDir::new().unwrap();
    let o = faberlab(&["gen", "--curve", "ellipse:2,1", "--n", "400"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn rerun_is_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = [
        "expand",
        "--curve",
        "ellipse:2,1",
        "--nodes",
        "256",
        "--m1",
        "6",
        "--m2",
        "6",
        "--f",
        "sample:runge",
    ];
    assert_eq!(faberlab(&args, a.path()).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_faberlab"))
        .args(args)
        .arg("--out")
        .arg(b.path())
        .env("FABERLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    for name in ["coefficients.csv", "residuals.csv", "expand.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_file_matches_inline_flags() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    faberlab(
        &["gen", "--curve", "ellipse:2,1", "--p", "3", "--n", "4"],
        a.path(),
    );
    let cfg = b.path().join("run.json");
    fs::write(&cfg, r#"{"curve": "ellipse:2,1", "p": 3, "n": 4}"#).unwrap();
    let o = faberlab(&["gen", "--config", cfg.to_str().unwrap()], b.path());
    assert_eq!(o.status.code(), Some(0));
    let x = fs::read(a.path().join("faber_plus_4.csv")).unwrap();
    let y = fs::read(b.path().join("faber_plus_4.csv")).unwrap();
    assert_eq!(x, y);

    // Inline flags override the file.
    let o = faberlab(
        &["gen", "--config", cfg.to_str().unwrap(), "--n", "2"],
        b.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(b.path().join("faber_plus_2.csv").exists());

    fs::write(&cfg, r#"{"curve": "circle", "bogus": 1}"#).unwrap();
    assert_eq!(
        faberlab(&["gen", "--config", cfg.to_str().unwrap()], b.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn solve_with_file_data() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("f.csv");
    let n = 256;
    let mut text = String::from("s,re,im\n");
    for j in 0..n {
        let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        text.push_str(&format!("{t},{},{}\n", (2.0 * t).cos(), (-t).sin()));
    }
    fs::write(&data, text).unwrap();
    let o = faberlab(
        &[
            "solve",
            "--curve",
            "circle",
            "--nodes",
            "256",
            "--f",
            data.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rep = read_json(&dir.path().join("solve.json"));
    assert!(rep["solutions"][0]["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(rep["config"]["inputs"].as_array().unwrap().len(), 1);
    let rows = data_rows(&fs::read_to_string(dir.path().join("solution.csv")).unwrap()).len();
    assert_eq!(rows, n);
}

#[test]
fn study_reports_slope() {
    let dir = TempDir::new().unwrap();
    let o = faberlab(
        &[
            "study",
            "--curve",
            "ellipse:2,1",
            "--weight",
            r#"{"points":[1.0],"alphas":[0.3],"p":2}"#,
            "--f",
            "sample:runge",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let rep = read_json(&dir.path().join("study.json"));
    assert!(rep["slope"].as_f64().unwrap() < -0.05);
    assert_eq!(rep["convergent"], true);
    let csv = fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 33);
    assert!(stdout(&o).starts_with("slope = "));
}

#[test]
fn phase_study_runs() {
    let dir = TempDir::new().unwrap();
    let o = faberlab(
        &[
            "study",
            "--phase-alpha",
            "0.2",
            "--p",
            "2",
            "--curve",
            "ellipse:2,1",
            "--f",
            "sample:runge",
            "--nodes",
            "512",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let rep = read_json(&dir.path().join("study.json"));
    assert!(rep["slope"].as_f64().unwrap().is_finite());
    assert_eq!(rep["config"]["pair"]["kind"], "phase_system");
}
