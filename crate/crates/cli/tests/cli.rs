use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mourre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mourre")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_in(dir: &TempDir, body: &str, sub: &str) -> (Output, std::path::PathBuf) {
    let cfg = write_config(dir.path(), &format!("{sub}.json"), body);
    let out = dir.path().join(sub);
    let o = mourre(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "1"]);
    (o, out)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const SHIFT_CERT: &str = r#"{"model": {"model": "shift", "half_width": 32},
  "suite": [{"op": "certify_mourre", "params": {"expected_a": 1.0}}]}"#;

#[test]
fn shift_certificate_reports_unit_constant() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_in(&dir, SHIFT_CERT, "shift");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let c = &r["checks"][0];
    assert_eq!(c["status"], "pass");
    assert!((c["payload"]["a_estimate"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!(!c["anchor"].as_str().unwrap().is_empty());
    assert!(c["wall_clock_s"].as_f64().unwrap() >= 0.0);
    let csv = fs::read_to_string(out.join("certify_mourre.csv")).unwrap();
    let hash = r["config_hash"].as_str().unwrap();
    assert!(csv.starts_with(&format!("# config_hash: {hash}\nindex,eigenvalue\n")));
}

#[test]
fn empty_suite_gives_empty_report() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_in(&dir, r#"{"model": {"model": "dilation"}}"#, "empty");
    assert_eq!(code(&o), 0);
    assert_eq!(report(&out)["checks"].as_array().unwrap().len(), 0);
}

#[test]
fn cocycle_with_mean_names_the_failing_check() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"model": {"model": "cocycle", "half_width": 16,
        "h_hat": [{"k": 0, "re": 0.25}, {"k": 1, "im": -0.08}]},
      "suite": [{"op": "ergodic_average_bound", "params": {"n": 3}}]}"#;
    let (o, out) = run_in(&dir, body, "coc");
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ergodic_average_bound") && err.contains("precondition"), "{err}");
    assert_eq!(report(&out)["checks"][0]["status"], "fail");
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("{\n  \"model\": {\"model\": \"shift\"},\n  \"suite\": [,]\n}", Some("line 3")),
        (r#"{"model": {"model": "shift"}, "colour": "red"}"#, None),
        (r#"{"model": {"model": "shift", "half_width": 32, "k": 1}}"#, None),
        (r#"{"model": {"model": "lattice"}}"#, None),
        (r#"{"model": {"model": "shift"}, "suite": [{"op": "no_such_check"}]}"#, None),
        (r#"{"model": {"model": "shift"}, "suite": [{"op": "delta_kernel"}], "tolerances": {"delta_kernel": 0.5}}"#, None),
        (r#"{"model": {"model": "shift"}, "suite": [{"op": "delta_kernel"}], "tolerances": {"other": 1e-8}}"#, None),
        (r#"{"model": {"model": "shift"}, "seedless": false}"#, None),
        (r#"{"model": {"model": "cocycle", "m": 0}}"#, None),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let (o, _) = run_in(&dir, body, &format!("bad{i}"));
        assert_eq!(code(&o), 2, "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        if let Some(n) = needle {
            assert!(String::from_utf8_lossy(&o.stderr).contains(n));
        }
    }
}

#[test]
fn list_checks_is_stable_and_anchored() {
    let a = mourre(&["list-checks"]);
    let b = mourre(&["list-checks"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let names: Vec<&str> = text.lines().skip(1).map(|l| l.split_whitespace().next().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for needed in ["verify_identity_a", "mourre_constant_cocycle", "lap_sweep"] {
        assert!(names.contains(&needed));
    }
    for line in text.lines().skip(1) {
        assert!(line.split_whitespace().count() >= 3, "missing anchor: {line}");
    }
}

const MIXED: &str = r#"{"model": {"model": "cocycle", "half_width": 24},
  "suite": [
    {"op": "mourre_constant_cocycle", "params": {"n": 3}},
    {"op": "averaged_lemma", "params": {"n": 5, "k": 80}},
    {"op": "lap_sweep", "params": {"ks": [16, 32], "eps": [0.3, 0.1]}},
    {"op": "wiener_diagnostic", "params": {"n": 512}}
  ]}"#;

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, out_a) = run_in(&dir, MIXED, "a");
    let (b, out_b) = run_in(&dir, MIXED, "b");
    assert_eq!(code(&a), code(&b));
    for name in ["mourre_constant_cocycle", "averaged_lemma", "lap_sweep", "wiener_diagnostic"] {
        let x = fs::read(out_a.join(format!("{name}.csv"))).unwrap();
        let y = fs::read(out_b.join(format!("{name}.csv"))).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn reproduce_matches_a_fresh_run() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_in(&dir, MIXED, "rep");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = mourre(&["reproduce", out.join("report.json").to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stdout));
}

#[test]
fn reproduce_after_tightening_fails_in_a_controlled_way() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"model": {"model": "shift", "half_width": 16},
      "suite": [{"op": "certify_mourre", "params": {"expected_a": 1.001}}],
      "tolerances": {"certify_mourre": 1e-2}}"#;
    let (o, out) = run_in(&dir, body, "tight");
    assert_eq!(code(&o), 0);
    let path = out.join("report.json");
    let mut r = report(&out);
    r["config"]["tolerances"]["certify_mourre"] = Value::from(1e-6);
    fs::write(&path, serde_json::to_string(&r).unwrap()).unwrap();
    let o = mourre(&["reproduce", path.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("status"));
}

#[test]
fn corrupted_or_foreign_reports_exit_three() {
    let dir = TempDir::new().unwrap();
    let (_, out) = run_in(&dir, SHIFT_CERT, "c");
    let path = out.join("report.json");
    let good = fs::read_to_string(&path).unwrap();

    fs::write(&path, &good[..good.len() / 2]).unwrap();
    assert_eq!(code(&mourre(&["reproduce", path.to_str().unwrap()])), 3);

    let mut r: Value = serde_json::from_str(&good).unwrap();
    r["format_version"] = Value::from(99);
    fs::write(&path, r.to_string()).unwrap();
    assert_eq!(code(&mourre(&["reproduce", path.to_str().unwrap()])), 3);

    let mut r: Value = serde_json::from_str(&good).unwrap();
    r["tool_version"] = Value::from("0.0.0-other");
    fs::write(&path, r.to_string()).unwrap();
    assert_eq!(code(&mourre(&["reproduce", path.to_str().unwrap()])), 3);
}

#[test]
fn format_flag_selects_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "f.json", SHIFT_CERT);
    let csv_dir = dir.path().join("csv");
    let o = mourre(&["run", "--config", &cfg, "--out", csv_dir.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(csv_dir.join("certify_mourre.csv").exists());
    assert!(!csv_dir.join("report.json").exists());
    let json_dir = dir.path().join("json");
    let o = mourre(&["run", "--config", &cfg, "--out", json_dir.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert!(json_dir.join("report.json").exists());
    assert!(!json_dir.join("certify_mourre.csv").exists());
}

#[test]
fn free_evolution_suite_runs_on_the_dense_path() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"model": {"model": "free_evolution", "time": 1.0, "cutoff": 2.0, "points": 64},
      "suite": [
        {"op": "verify_identity_a"},
        {"op": "delta_kernel", "params": {"z": [0.2, -0.6]}},
        {"op": "averaged_lemma", "params": {"n": 2}},
        {"op": "smooth_sum", "params": {"k_max": 4}},
        {"op": "export_section", "params": {"format": "json"}},
        {"op": "wiener_diagnostic"}
      ]}"#;
    let (o, out) = run_in(&dir, body, "free");
    // The Wiener diagnostic needs a lattice model, so the run fails on it alone.
    assert_eq!(code(&o), 1);
    let r = report(&out);
    let statuses: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["status"].as_str().unwrap()).collect();
    assert_eq!(&statuses[..3], ["pass", "pass", "pass"]);
    assert_eq!(statuses[5], "fail");
    assert!(r["checks"][5]["error"].as_str().unwrap().contains("lattice"));
    assert!(out.join("export_section.json").exists());
}
