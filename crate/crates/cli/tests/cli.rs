//! End-to-end runs of the `blocc` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn blocc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blocc")).args(args).output().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pedagogical_run_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = blocc(&["pedagogical", "--repeats", "3", "--outer-iters", "50", "--output-dir", out]);
    assert!(o.status.success(), "{}", stderr(&o));

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "repeat,iter,f_at_yF,f_at_yg,g_gap,gen_grad_norm,max_violation,wall_time_s"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();

    let summary = read_json(&dir.path().join("summary.json"));
    let repeats = summary["repeats"].as_array().unwrap();
    assert_eq!(repeats.len(), 3);
    let total: u64 = repeats.iter().map(|r| r["iterations"].as_u64().unwrap()).sum();
    assert_eq!(rows.len() as u64, total);

    // Per-repeat finals are the last trace rows; their mean reproduces the summary.
    let mut finals = Vec::new();
    for (k, r) in repeats.iter().enumerate() {
        let last = rows.iter().filter(|row| row[0] == k as f64).last().unwrap();
        assert_eq!(r["last"]["f_at_yg"].as_f64().unwrap(), last[3]);
        finals.push(last[3]);
    }
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    let reported = summary["last_row"]["f_at_yg"]["mean"].as_f64().unwrap();
    assert!((mean - reported).abs() <= 1e-12);
    assert_eq!(summary["config"]["repeats"], 3);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# pedagogical settings\ngamma = 3\nouter_iters = 5\n").unwrap();
    let out = dir.path().join("out");
    let o = blocc(&[
        "pedagogical",
        "--config",
        cfg.to_str().unwrap(),
        "--gamma",
        "4",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["config"]["gamma"].as_f64(), Some(4.0));
    assert_eq!(summary["config"]["outer_iters"].as_u64(), Some(5));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "gama = 3\n").unwrap();
    let o = blocc(&["toy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("config:") && err.contains("'gama'") && err.contains("gamma"), "{err}");
}

#[test]
fn exit_codes_distinguish_config_and_io_errors() {
    let o = blocc(&["svm"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = blocc(&["toy", "--repeats", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = blocc(&["svm", "--dataset", "/nonexistent/data.libsvm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("io:"));
    let o = blocc(&["transport", "--network", "/nonexistent/net.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn deterministic_runs_are_bitwise_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = blocc(&[
            "toy",
            "--repeats",
            "4",
            "--seed",
            "11",
            "--outer-iters",
            "200",
            "--deterministic",
            "--output-dir",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let trace = |d: &tempfile::TempDir| fs::read(d.path().join("trace.csv")).unwrap();
    assert_eq!(trace(&a), trace(&b));
    // The echoed output directory is the only intended difference.
    let summary = |d: &tempfile::TempDir| {
        let text = fs::read_to_string(d.path().join("summary.json")).unwrap();
        text.replace(d.path().to_str().unwrap(), "OUT")
    };
    assert_eq!(summary(&a), summary(&b));
}

#[test]
fn gradcheck_pedagogical_reports_two_x() {
    let dir = tempfile::tempdir().unwrap();
    let o = blocc(&["gradcheck", "--experiment", "pedagogical", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&dir.path().join("gradcheck.json"));
    assert_eq!(report["passed"], true);
    for c in report["grad_v"].as_array().unwrap() {
        let x = c["x"].as_f64().unwrap();
        assert!((c["estimate"].as_f64().unwrap() - 2.0 * x).abs() <= 1e-4);
    }
}

#[test]
fn gradcheck_audits_transport_network_file() {
    let dir = tempfile::tempdir().unwrap();
    let net = data("three_node.net");
    let o = blocc(&[
        "gradcheck",
        "--experiment",
        "transport",
        "--network",
        &net,
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn small_toy_sweep_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = blocc(&[
        "sweep",
        "--experiment",
        "toy",
        "--gammas",
        "0.1,1.0",
        "--etas",
        "0.01,0.1",
        "--repeats",
        "2",
        "--outer-iters",
        "20",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["cells"].as_array().unwrap().len(), 4);
}
