use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

fn nonsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonsig"))
        .args(args)
        .env_remove("NONSIG_VERTEX_CAP")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_fig2_passes() {
    let o = nonsig(&["validate", &fixture("fig2/scenario.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["valid"], true);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn validate_bancal_locates_signaling() {
    let o = nonsig(&["validate", &fixture("bancal/scenario.json")]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["valid"], false);
    let failed: Vec<&Value> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .collect();
    assert!(!failed.is_empty());
    assert!(failed[0]["name"].as_str().unwrap().starts_with("resource"));
    assert!(failed[0]["detail"].as_str().unwrap().contains("signals"));
}

#[test]
fn signaling_resource_without_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut s: Value =
        serde_json::from_str(&fs::read_to_string(fixture("bancal/scenario.json")).unwrap())
            .unwrap();
    s.as_object_mut().unwrap().remove("counterexample");
    let path = dir.path().join("s.json");
    fs::write(&path, s.to_string()).unwrap();
    let o = nonsig(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let o = nonsig(&["joint", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("signals"), "{}", stderr(&o));
}

#[test]
fn malformed_json_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"name\": ").unwrap();
    for cmd in ["validate", "joint", "behavior"] {
        let o = nonsig(&[cmd, path.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{cmd}");
        assert!(stderr(&o).contains("bad.json"));
    }
    let o = nonsig(&[
        "validate",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn joint_fig2_sums_to_one() {
    let o = nonsig(&["joint", &fixture("fig2/scenario.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    let dists = v["distributions"].as_array().unwrap();
    assert_eq!(dists.len(), 8);
    assert!(dists.iter().all(|d| d["sum"] == "1/1"));
}

#[test]
fn joint_counterexample_sums_to_zero() {
    let o = nonsig(&[
        "joint",
        &fixture("bancal/scenario.json"),
        "--allow-unnormalized",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    for d in v["distributions"].as_array().unwrap() {
        assert_eq!(d["sum"], "0/1");
        assert!(d["support"].as_array().unwrap().is_empty());
    }
    let o = nonsig(&["joint", &fixture("bancal/scenario.json")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn joint_rejects_bad_settings() {
    let o = nonsig(&[
        "joint",
        &fixture("fig2/scenario.json"),
        "--settings",
        "0,7,0",
    ]);
    assert_eq!(code(&o), 2);
    let o = nonsig(&["joint", &fixture("fig2/scenario.json"), "--settings", "x"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_resource_scenario_is_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let s = json!({
        "name": "empty",
        "parties": ["A"],
        "settings": {"A": [0, 1]},
        "resources": [],
        "trees": [{"party": "A", "settings": {"0": {"outcome": "0"}, "1": {"outcome": "1"}}}],
        "outcomes": {"A": {"rule": "labels", "alphabet": [0, 1]}},
    });
    let path = dir.path().join("s.json");
    fs::write(&path, s.to_string()).unwrap();
    let o = nonsig(&["joint", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    for d in v["distributions"].as_array().unwrap() {
        assert_eq!(d["sum"], "1/1");
        assert_eq!(d["support"].as_array().unwrap().len(), 1);
        assert_eq!(d["support"][0]["p"], "1/1");
    }
    // The behavior is deterministic: outcome equals setting.
    let o = nonsig(&["behavior", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["table"]["0"]["0"], "1/1");
    assert_eq!(v["table"]["1"]["1"], "1/1");
}

fn write_behavior(dir: &Path, scenario: &str) -> PathBuf {
    let out = dir.join("behavior.json");
    let o = nonsig(&[
        "behavior",
        &fixture(scenario),
        "--check-nosig",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn behavior_round_trips_as_resource() {
    let dir = tempfile::tempdir().unwrap();
    for scenario in ["fig2/scenario.json", "wired-pr/scenario.json"] {
        let out = write_behavior(dir.path(), scenario);
        let r = nonsig::network::load_resource(&out, false).expect("behavior file is nonsignaling");
        assert_eq!(r.parties().len(), 3);
    }
}

#[test]
fn wired_pr_behavior_feeds_ineq_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = write_behavior(dir.path(), "wired-pr/scenario.json");
    let o = nonsig(&[
        "ineq",
        "eval",
        "--ineq",
        "mao",
        "--behavior",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["bound"], "4/1");
    let o = nonsig(&[
        "ineq",
        "eval",
        "--ineq",
        "cr-prob",
        "--behavior",
        out.to_str().unwrap(),
    ]);
    assert_eq!(stdout_json(&o)["relation"], ">=");
    // Wrong signature for the three-setting form.
    let o = nonsig(&[
        "ineq",
        "eval",
        "--ineq",
        "cao-s14",
        "--behavior",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn decompose_pr_gives_certificate() {
    let o = nonsig(&[
        "decompose",
        &fixture("boxes/pr.json"),
        "--vertices",
        "local",
    ]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["feasible"], false);
    let c = &v["certificate"];
    let value = nonsig::rational::parse_rational(c["value"].as_str().unwrap()).unwrap();
    let bound = nonsig::rational::parse_rational(c["bound"].as_str().unwrap()).unwrap();
    assert!(value > bound);
}

#[test]
fn decompose_deterministic_is_single_vertex() {
    let o = nonsig(&["decompose", &fixture("boxes/deterministic.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0]["weight"], "1/1");
}

#[test]
fn decompose_noisy_pr_against_ns222() {
    let o = nonsig(&[
        "decompose",
        &fixture("boxes/noisy-pr-3-4.json"),
        "--vertices",
        "ns222",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    let total = v["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| nonsig::rational::parse_rational(c["weight"].as_str().unwrap()).unwrap())
        .fold(nonsig::rational::int(0), |a, b| a + b);
    assert_eq!(total, nonsig::rational::int(1));
    // Not local at v = 3/4.
    let o = nonsig(&["decompose", &fixture("boxes/noisy-pr-3-4.json")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn decompose_with_vertex_file() {
    let dir = tempfile::tempdir().unwrap();
    let pr: Value =
        serde_json::from_str(&fs::read_to_string(fixture("boxes/pr.json")).unwrap()).unwrap();
    let det: Value =
        serde_json::from_str(&fs::read_to_string(fixture("boxes/deterministic.json")).unwrap())
            .unwrap();
    let path = dir.path().join("v.json");
    fs::write(&path, json!([pr, det]).to_string()).unwrap();
    let o = nonsig(&[
        "decompose",
        &fixture("boxes/pr.json"),
        "--vertices",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["components"][0]["vertex"], "PR");
    assert_eq!(v["components"][0]["provenance"], "external");
}

#[test]
fn vertex_cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_nonsig"))
        .args(["decompose", &fixture("boxes/pr.json")])
        .env("NONSIG_VERTEX_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("cap"), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_nonsig"))
        .args(["decompose", &fixture("boxes/pr.json")])
        .env("NONSIG_VERTEX_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn derive_reports_all_steps() {
    let o = nonsig(&["ineq", "derive"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["steps"].as_array().unwrap().len(), 6);
    let o = nonsig(&["ineq", "derive", "--pretty"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.contains("pass")).count(), 6);
}

#[test]
fn ghz_search_and_eval() {
    let o = nonsig(&["ghz", "search", "--ineq", "mao", "--grid", "8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert!(v["value"].as_f64().unwrap() > 4.1);
    let dir = tempfile::tempdir().unwrap();
    let strategy = dir.path().join("s.json");
    fs::write(&strategy, v.to_string()).unwrap();
    let behavior = dir.path().join("b.json");
    let o = nonsig(&[
        "ghz",
        "eval",
        "--angles",
        strategy.to_str().unwrap(),
        "-o",
        behavior.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = nonsig(&[
        "ineq",
        "eval",
        "--ineq",
        "mao",
        "--behavior",
        behavior.to_str().unwrap(),
    ]);
    let e = stdout_json(&o);
    assert_eq!(e["satisfied"], false);
    assert!((e["value"].as_f64().unwrap() - v["value"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn ghz_eval_inline_angles() {
    let o = nonsig(&["ghz", "eval", "--angles", "0,0,0,0,0,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert!((v["table"]["0,0,0"]["0,0,0"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let o = nonsig(&["ghz", "eval", "--angles", "0,0,0,0"]);
    assert_eq!(code(&o), 2);
    let o = nonsig(&["ghz", "search", "--ineq", "cr-prob"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn snapshot_strategy_reproduces() {
    let snap: Value =
        serde_json::from_str(&fs::read_to_string(fixture("ghz/mao-strategy.json")).unwrap())
            .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let behavior = dir.path().join("b.json");
    let o = nonsig(&[
        "ghz",
        "eval",
        "--angles",
        &fixture("ghz/mao-strategy.json"),
        "-o",
        behavior.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = nonsig(&[
        "ineq",
        "eval",
        "--ineq",
        "mao",
        "--behavior",
        behavior.to_str().unwrap(),
    ]);
    let v = stdout_json(&o)["value"].as_f64().unwrap();
    assert!((v - snap["value"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn output_independent_of_thread_count() {
    for args in [
        vec!["behavior", "WIRED"],
        vec!["ghz", "search", "--grid", "6", "--refine", "1e-3"],
    ] {
        let wired = fixture("wired-pr/scenario.json");
        let args: Vec<&str> = args
            .iter()
            .map(|a| if *a == "WIRED" { wired.as_str() } else { a })
            .collect();
        let one = nonsig(&[&["--threads", "1"][..], &args].concat());
        let two = nonsig(&[&["--threads", "3"][..], &args].concat());
        let default = nonsig(&args);
        assert_eq!(code(&one), 0, "{}", stderr(&one));
        assert_eq!(one.stdout, two.stdout);
        assert_eq!(one.stdout, default.stdout);
    }
}

#[test]
fn pretty_mode_prints_tables() {
    let o = nonsig(&["--pretty", "validate", &fixture("fig2/scenario.json")]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("scenario fig2: valid"));
    assert!(serde_json::from_str::<Value>(&text).is_err());
}
