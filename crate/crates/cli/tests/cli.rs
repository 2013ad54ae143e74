use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_control-energy"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn one_node_config(dir: &Path) -> std::path::PathBuf {
    fs::write(dir.join("one.network.json"), r#"{"n":1,"edges":[],"diag":[0.0],"seed":0}"#).unwrap();
    let cfg = dir.join("one.json");
    fs::write(
        &cfg,
        r#"{"name":"one","network":{"generator":"file","path":"one.network.json"},"drivers":"all",
            "grid":{"min":1.0,"max":4.0,"points":3,"log":true}}"#,
    )
    .unwrap();
    cfg
}

#[test]
fn single_node_sweep_follows_inverse_tf() {
    let dir = tempfile::tempdir().unwrap();
    one_node_config(dir.path());
    let out = run(&["sweep", "--config", "one.json", "--output", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/one.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "tf,lower_exact,upper_exact,lower_est,upper_est,lower_trace_prior,cond,overflow_path,error");
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        let tf: f64 = cols[0].parse().unwrap();
        for c in &cols[1..6] {
            assert_eq!(c.parse::<f64>().unwrap(), 1.0 / tf, "{row}");
        }
        assert_eq!(cols[8], "");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    one_node_config(dir.path());
    let out = run(&["sweep", "--config", "one.json", "--points", "5", "--name", "five", "--output", "o"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("o/five.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--n", "12", "--a", "-1", "--driver-count", "2", "--driver-seed", "4", "--points", "13"];
    let mut outputs = Vec::new();
    for (sub, seq) in [("p", false), ("s", true)] {
        let mut a: Vec<&str> = args.to_vec();
        a.extend(["--output", sub]);
        if seq {
            a.push("--sequential");
        }
        assert!(run(&a, dir.path()).status.success());
        let read = |ext: &str| fs::read(dir.path().join(sub).join(format!("run.{ext}"))).unwrap();
        outputs.push((read("csv"), read("summary.json"), read("network.json")));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn preset_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["preset", "fig1a", "--output", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("o/fig1a.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["class"], "ND");
    assert_eq!(summary["n"], 50);
    assert!(dir.path().join("o/fig1a.csv").exists());
    assert!(dir.path().join("o/fig1a.network.json").exists());
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for r in ["a.json", "b.json"] {
        let out = run(&["verify", "--criteria", "3,4,8", "--report", r], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8_lossy(&out.stdout);
        assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    }
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("b.json")).unwrap());
}

#[test]
fn mis_specified_law_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--criteria", "10", "--mis-specify"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] criterion 10"));
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--n", "5", "--points", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.points"));
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--config", "absent.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_for_a_single_node() {
    let dir = tempfile::tempdir().unwrap();
    one_node_config(dir.path());
    let out = run(&["bounds", "--config", "one.json", "--tf", "2"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lower_exact"]["value"], "5.0000000000000000e-1");
    assert_eq!(v["upper_est"]["value"], "5.0000000000000000e-1");
}
