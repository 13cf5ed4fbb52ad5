use std::process::{Command, Output};

use serde_json::Value;

fn realbloch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_realbloch")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn classification_csv_rows() {
    let o = realbloch(&["tables", "classification", "--no-timing"]);
    assert!(o.status.success());
    let body: Vec<String> = stdout(&o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
    assert_eq!(body[0], "vb,azc,d1,d2,d3,d4_m1,d4_m2");
    assert_eq!(body[1], "Vec_C(S^d),A,0,Z,0,0,Z");
    assert_eq!(body[2], "Vec_R(S~d),AI,0,0,0,0,2Z");
    assert_eq!(body[3], "Vec_C(T^d),A,0,Z,Z^3,Z^6,Z^7");
    assert_eq!(body[4], "Vec_R(T~d),AI,0,0,0,0,2Z");
    assert_eq!(body.len(), 5);
}

#[test]
fn cohomology_json_has_manifest() {
    let o = realbloch(&["tables", "cohomology", "--space", "tr-torus", "--d", "4", "--kmax", "4", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["result"]["groups"][4], "Z+Z2^15");
    assert!(v["manifest"]["command_line"].as_array().unwrap().len() > 3);
    assert!(v["manifest"]["tool_version"].is_string());
}

#[test]
fn k_group_and_audit() {
    let o = realbloch(&["tables", "k", "--flavor", "kr", "--space", "point", "--j", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).trim_end().ends_with(",Z"));
    let o = realbloch(&["tables", "k-audit"]);
    let v = json(&o);
    assert_eq!(v["result"]["flagged"], serde_json::json!([5, 6, 7, 8]));
}

#[test]
fn regular_value_degree_of_ansatz() {
    let o = realbloch(&["degree", "--map", "ansatz", "--method", "regular-value"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["result"]["value"], 2.0);
}

#[test]
fn hopf_c2_on_a_coarse_grid() {
    let o = realbloch(&["invariant", "c2", "--model", "hopf", "--grid", "24", "--box", "10", "--refine", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["result"]["nearest_integer"], 1);
    assert_eq!(v["result"]["refinement"].as_array().unwrap().len(), 2);
    assert_eq!(v["manifest"]["grids"].as_array().unwrap().len(), 2);
}

#[test]
fn model_file_is_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, r#"{"family": "standard-ansatz", "J": "1"}"#).unwrap();
    let o = realbloch(&["verify", "real", "--model", path.to_str().unwrap(), "--torus-n", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["manifest"]["config_sha256"].as_str().unwrap().len(), 64);
    assert!(v["result"]["max_deviation"].as_f64().unwrap() < 1e-12);
}

#[test]
fn wrong_j_is_a_verification_failure() {
    let o = realbloch(&["verify", "real", "--model", "standard-ansatz", "--j", "S1", "--torus-n", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(realbloch(&["tables", "bogus"]).status.code(), Some(1));
    assert_eq!(realbloch(&["degree", "--map", "sideways"]).status.code(), Some(1));
    assert_eq!(realbloch(&["invariant", "c2", "--model", "missing.json"]).status.code(), Some(1));
    assert_eq!(realbloch(&["tables", "cohomology", "--space", "torus", "--d", "3", "--twist", "2"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"family\": \"klein\"}").unwrap();
    let o = realbloch(&["verify", "ai", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("klein"));
    assert!(realbloch(&["--help"]).status.success());
}

#[test]
fn hopf_is_not_a_tau_candidate() {
    let o = realbloch(&["verify", "ai", "--model", "hopf", "--torus-n", "9", "--slice-n", "8", "--grid", "12", "--box", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["verdict"], "not-applicable");
}

#[test]
fn single_thread_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = realbloch(&[
            "--threads", "1", "--no-timing", "--out", out.to_str().unwrap(),
            "invariant", "c2", "--model", "standard-ansatz", "--grid", "12", "--box", "6",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.json");
    let b = run("b.json");
    // the manifest records the output path; strip it before comparing
    let strip = |s: &str| s.lines().filter(|l| !l.contains(".json")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
    assert!(!a.contains("wall_time_s"));
}

#[test]
fn quick_golden_suite() {
    let o = realbloch(&["verify", "golden", "--criterion", "1,2,3", "--format", "csv", "--no-timing"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with('C')).count(), 3);
}
