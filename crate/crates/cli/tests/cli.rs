use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_singtrace"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("SINGTRACE_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args, None);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn code(args: &[&str]) -> i32 {
    run(args, None).status.code().expect("exit code")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn trace_harmonic_all_routes_agree() {
    let doc = json_of(&["trace", "--model", "harmonic", "--method", "all", "--tmax", "1e12"]);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["model"], "harmonic");
    assert_eq!(doc["provenance"]["target"]["provenance"], "exact");
    let reports = doc["reports"].as_array().unwrap();
    let methods: Vec<&str> = reports.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["cesaro", "zeta", "heat", "lidskii"]);
    for r in reports {
        assert!((f(&r["value"]) - 1.0).abs() < 2e-2, "{r}");
    }
    let deltas = doc["cross_route_deltas"].as_array().unwrap();
    assert_eq!(deltas.len(), 6);
    assert!(deltas.iter().all(|d| f(&d["delta"]) < 2e-2));
}

#[test]
fn numbers_carry_seventeen_digits() {
    let out = run(&["trace", "--model", "harmonic", "--method", "cesaro"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"p\": 1.0000000000000000e0"), "{text}");
}

#[test]
fn toeplitz_example() {
    let doc = json_of(&["toeplitz", "--w", "1", "--R", "1e6"]);
    let s = &doc["reports"][0];
    assert_eq!(s["truncated"], -1);
    assert!((f(&s["dixmier"]) + 1.0).abs() < 5e-2, "{s}");
    assert_eq!(f(&s["lesch"]), -1.0);
    let neg = json_of(&["toeplitz", "--w", "-3"]);
    assert_eq!(neg["reports"][0]["truncated"], 3);
}

#[test]
fn measurable_oscillating_example() {
    let doc = json_of(&["measurable", "--model", "osc:a=0.15,b=4"]);
    let s = &doc["reports"][0];
    assert_eq!(s["measurable"], "no");
    assert!((f(&s["interval"][0]) - 0.85).abs() < 2e-2, "{s}");
    assert!((f(&s["interval"][1]) - 1.15).abs() < 2e-2, "{s}");
    let yes = json_of(&["measurable", "--model", "harmonic"]);
    assert_eq!(yes["reports"][0]["measurable"], "yes");
}

#[test]
fn range_oscillating_model() {
    let doc = json_of(&["range", "--model", "osc:a=0.15,b=4"]);
    let s = &doc["reports"][0];
    assert!((f(&s["lower"]) - 0.85).abs() < 2e-2, "{s}");
    assert!((f(&s["upper"]) - 1.15).abs() < 2e-2, "{s}");
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let args = ["trace", "--model", "torus:n=2,R=300", "--method", "all"];
    let a = run(&args, Some("1"));
    let b = run(&args, Some("4"));
    let c = run(&args, Some("4"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
}

#[test]
fn explicit_file_reproduces_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("circle.json");
    let file = file.to_str().unwrap();
    assert_eq!(code(&["export", "--model", "circle:R=10000", "--out", file]), 0);
    let spec = format!("explicit:file={file}");
    let direct = json_of(&["trace", "--model", "circle:R=10000", "--method", "all"]);
    let round = json_of(&["trace", "--model", &spec, "--method", "all"]);
    let (a, b) = (direct["reports"].as_array().unwrap(), round["reports"].as_array().unwrap());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x["method"], y["method"]);
        assert!((f(&x["value"]) - f(&y["value"])).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn series_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let out_s = out.to_str().unwrap();
    assert_eq!(
        code(&["trace", "--model", "harmonic", "--method", "cesaro", "--out", out_s, "--emit-series"]),
        0
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let grid_size = f(&doc["reports"][0]["diagnostics"]["grid_size"]) as usize;
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,g,tail_cut,heat,zeta_s,zeta_val"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), grid_size);
    assert!(rows.iter().all(|r| r.split(',').count() == 6));
}

fn write_path(dir: &Path, name: &str, nodes: &[[[f64; 2]; 2]]) -> String {
    // Real 2x2 nodes written as rows of [re, im] pairs.
    let nodes: Vec<Vec<Vec<[f64; 2]>>> = nodes
        .iter()
        .map(|m| m.iter().map(|row| row.iter().map(|&x| [x, 0.0]).collect()).collect())
        .collect();
    let path = dir.join(name);
    std::fs::write(&path, serde_json::json!({ "nodes": nodes }).to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn specflow_three_definitions() {
    let dir = tempfile::tempdir().unwrap();
    let up = write_path(dir.path(), "up.json", &[[[-1.0, 0.0], [0.0, 2.0]], [[1.0, 0.0], [0.0, 2.0]]]);
    let doc = json_of(&["specflow", "--path", &up]);
    let s = &doc["reports"][0];
    assert_eq!(s["crossings"], 1);
    assert_eq!(s["partition"], 1);
    assert_eq!(s["integral"]["applies"], false);

    // diag(-1, 1) rotated into diag(1, -1): endpoint spectra agree.
    let swap = write_path(
        dir.path(),
        "swap.json",
        &[[[-1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, -1.0]]],
    );
    let doc = json_of(&["specflow", "--path", &swap]);
    let s = &doc["reports"][0];
    assert_eq!(s["agree"], true);
    assert_eq!(s["integral"]["applies"], true);
    assert!(f(&s["integral"]["value"]).abs() < 1e-6, "{s}");
}

#[test]
fn gallery_lists_targets_with_provenance() {
    let doc = json_of(&["gallery"]);
    let entries = doc["reports"].as_array().unwrap();
    assert!(entries.len() >= 8);
    for e in entries {
        let p = e["provenance"].as_str().unwrap();
        assert!(["exact", "oracle", "literature"].contains(&p), "{e}");
    }
    let osc = entries.iter().find(|e| e["spec"] == "osc:a=0.15,b=4").unwrap();
    assert!(osc["target"].is_null());
}

#[test]
fn props_subset_passes() {
    let doc = json_of(&["props", "--only", "dilation_shift_exchange,toeplitz_consistency"]);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["passed"] == true));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["trace", "--model", "harmonic:q=1"]), 2);
    assert_eq!(code(&["trace", "--model", "nonsense"]), 2);
    assert_eq!(code(&["trace", "--model", "harmonic", "--p", "0.5"]), 2);
    assert_eq!(code(&["trace", "--model", "harmonic", "--tmax", "1e12", "--log-tmax", "100"]), 2);
    assert_eq!(code(&["props", "--only", "no_such_property"]), 2);
    assert_eq!(code(&["trace", "--model", "torus:n=5,R=10"]), 3);
    assert_eq!(code(&["trace", "--model", "explicit:file=/nonexistent/values.json"]), 3);
    assert_eq!(code(&["trace", "--model", "torus:n=3,R=300"]), 4);
    assert_eq!(code(&["bogus"]), 2);
}
