// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const A2: &str = r#"{"B": [[0, 1], [-1, 0]]}"#;
const A3: &str = r#"{"B": [[0, 1, 0], [-1, 0, 1], [0, -1, 0]]}"#;
const G2: &str = r#"{"B": [[0, 1], [-3, 0]]}"#;
const MARKOV: &str = r#"{"B": [[0, 2, -2], [-2, 0, 2], [2, -2, 0]]}"#;

fn nlf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn enumerate_a2_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a2.json");
    let out = nlf(&["enumerate", "--input", A2, "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5 vertices, 5 edges, complete");
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(g["vertices"].as_array().unwrap().len(), 5);
    assert_eq!(g["edges"].as_array().unwrap().len(), 5);
    assert_eq!(g["complete"], true);
}

#[test]
fn enumerate_reads_matrix_file_with_symmetrizer() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b2.json");
    std::fs::write(&path, r#"{"B": [[0, 1], [-2, 0]], "symmetrizer": [2, 1]}"#).unwrap();
    let out = nlf(&["enumerate", "--input", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("6 vertices, 6 edges, complete"));
}

#[test]
fn non_skew_symmetrizable_input_is_rejected() {
    let out = nlf(&["enumerate", "--input", r#"{"B": [[0, 1], [1, 0]]}"#]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not skew-symmetrizable"));
}

#[test]
fn wrong_symmetrizer_is_rejected() {
    let out = nlf(&["enumerate", "--input", r#"{"B": [[0, 1], [-2, 0]], "symmetrizer": [1, 1]}"#]);
    assert_eq!(code(&out), 3);
}

#[test]
fn markov_depth_limit_is_incomplete() {
    let out = nlf(&["enumerate", "--input", MARKOV, "--max-depth", "5", "--format", "text"]);
    assert_eq!(code(&out), 4);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().next().unwrap().contains("incomplete"), "{text}");
}

#[test]
fn mutate_a2_direction_one() {
    let out = nlf(&["mutate", "--input", A2, "--path", "1"]);
    assert_eq!(code(&out), 0);
    let seed = stdout_json(&out);
    assert_eq!(seed["variables"], serde_json::json!(["x1^-1 + x1^-1*x2", "x2"]));
    assert_eq!(seed["C"], serde_json::json!([[-1, 1], [0, 1]]));
    assert_eq!(seed["B"], serde_json::json!([[0, -1], [1, 0]]));
}

#[test]
fn mutate_empty_and_involutive_paths_give_initial_seed() {
    for path in ["", "1,1", "2,2,1,1"] {
        let out = nlf(&["mutate", "--input", A2, "--path", path]);
        assert_eq!(code(&out), 0);
        let seed = stdout_json(&out);
        assert_eq!(seed["variables"], serde_json::json!(["x1", "x2"]), "path {path:?}");
        assert_eq!(seed["C"], serde_json::json!([[1, 0], [0, 1]]));
        assert_eq!(seed["B"], serde_json::json!([[0, 1], [-1, 0]]));
    }
}

#[test]
fn mutate_out_of_range_direction() {
    assert_eq!(code(&nlf(&["mutate", "--input", A2, "--path", "3"])), 6);
    assert_eq!(code(&nlf(&["mutate", "--input", A2, "--path", "0"])), 6);
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(code(&nlf(&["mutate", "--input", A2, "--path", "a"])), 2);
    assert_eq!(code(&nlf(&["enumerate"])), 2);
    assert_eq!(code(&nlf(&["frobnicate"])), 2);
    assert_eq!(code(&nlf(&["enumerate", "--input", "/nonexistent/matrix.json"])), 7);
    assert_eq!(code(&nlf(&["enumerate", "--input", "{not json"])), 7);
    assert_eq!(code(&nlf(&["enumerate", "--input", A2, "--max-vertices", "0"])), 2);
}

#[test]
fn verify_a3_checks_all_pairs() {
    let out = nlf(&["verify-nlf", "--input", A3]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["pairs_checked"], 91);
    assert_eq!(report["exhaustive"], true);
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
    assert_eq!(report["route_disagreements"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_g2() {
    let out = nlf(&["verify-nlf", "--input", G2]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["graph"]["vertices"], 8);
    assert_eq!(report["graph"]["edges"], 8);
    assert_eq!(report["pairs_checked"], 28);
}

#[test]
fn verify_refuses_incomplete_graph() {
    let out = nlf(&["verify-nlf", "--input", MARKOV, "--max-depth", "3"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing"));
}

#[test]
fn verify_pair_budget_samples_deterministically() {
    let out = nlf(&["verify-nlf", "--input", A3, "--pair-budget", "10"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["exhaustive"], false);
    assert_eq!(report["pairs_total"], 91);
    assert!(report["pairs_checked"].as_u64().unwrap() <= 10);
}

fn corrupt(graph: &Path, out: &Path) {
    let mut g: Value = serde_json::from_str(&std::fs::read_to_string(graph).unwrap()).unwrap();
    let edges = g["edges"].as_array_mut().unwrap();
    edges.retain(|e| e != &serde_json::json!([0, 1]));
    std::fs::write(out, serde_json::to_string(&g).unwrap()).unwrap();
}

#[test]
fn corrupted_fixture_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    let report = dir.path().join("report.json");
    assert_eq!(code(&nlf(&["enumerate", "--input", A2, "--output", good.to_str().unwrap()])), 0);
    assert_eq!(code(&nlf(&["verify-nlf", "--graph", good.to_str().unwrap()])), 0);
    corrupt(&good, &bad);
    let out = nlf(&[
        "verify-nlf",
        "--graph",
        bad.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let v = &r["violations"][0];
    assert_eq!(v["v"], 0);
    assert_eq!(v["w"], 1);
    assert!(v["leaving_vertex"].is_u64());
}

#[test]
fn bongartz_and_project() {
    let out = nlf(&["bongartz", "--input", A2, "--u", "x1", "--root", "1"]);
    assert_eq!(code(&out), 0);
    let rec = stdout_json(&out);
    assert_eq!(rec["U"], serde_json::json!(["x1"]));
    assert_eq!(rec["root_path"], serde_json::json!([1]));
    for entry in rec["certificate"].as_array().unwrap() {
        assert!(entry["c_vector"].as_array().unwrap().iter().all(|c| c.as_i64().unwrap() >= 0));
    }

    let out = nlf(&["project", "--input", A2, "--u", "x2"]);
    assert_eq!(code(&out), 0);
    let p = stdout_json(&out);
    assert_eq!(p["face"].as_array().unwrap().len(), 2);
    assert_eq!(p["violations"].as_array().unwrap().len(), 0);

    assert_eq!(code(&nlf(&["project", "--input", A2, "--u", "x7"])), 6);
}

#[test]
fn cvectors_at_root_vertex_are_identity() {
    let out = nlf(&["cvectors", "--input", A2, "--root", "2"]);
    assert_eq!(code(&out), 0);
    let dump = stdout_json(&out);
    let root_entry = dump["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["witness_path"] == serde_json::json!([2]))
        .unwrap();
    assert_eq!(root_entry["C"], serde_json::json!([[1, 0], [0, 1]]));
}

#[test]
fn export_dot_highlights_face() {
    let out = nlf(&["export-dot", "--input", A2, "--u", "x1"]);
    assert_eq!(code(&out), 0);
    let dot = String::from_utf8_lossy(&out.stdout);
    assert!(dot.starts_with("graph"), "{dot}");
    assert_eq!(dot.matches("--").count(), 5);
}

#[test]
fn outputs_are_identical_across_runs_and_worker_counts() {
    let reference = nlf(&["--workers", "1", "verify-nlf", "--input", A3]);
    for workers in ["1", "2", "4", "8"] {
        let again = nlf(&["--workers", workers, "verify-nlf", "--input", A3]);
        assert_eq!(again.stdout, reference.stdout, "workers {workers}");
    }
    let e1 = nlf(&["--workers", "1", "enumerate", "--input", G2, "--format", "dot"]);
    let e4 = nlf(&["--workers", "4", "enumerate", "--input", G2, "--format", "dot"]);
    assert_eq!(e1.stdout, e4.stdout);
    let m1 = nlf(&["--workers", "1", "enumerate", "--input", MARKOV, "--max-depth", "4"]);
    let m4 = nlf(&["--workers", "3", "enumerate", "--input", MARKOV, "--max-depth", "4"]);
    assert_eq!(m1.stdout, m4.stdout);
}
