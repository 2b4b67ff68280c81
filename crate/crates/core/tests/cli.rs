use std::process::{Command, Output};

use serde_json::Value;

const U: &str = "94>89,95>69,96>48,97>42,98>61,99>81";
const DELTA: &str = "2>99,54>50,55>32,56>27,57>23,58>39,59>41";

fn moksha(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moksha"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.push("--json");
    let o = moksha(&full);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn has_keys(v: &Value, keys: &[&str]) {
    for k in keys {
        assert!(v.get(k).is_some(), "missing {k} in {v}");
    }
}

#[test]
fn exit_codes() {
    let o = moksha(&["classify", "--board", U]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("Unwinnable"));

    let o = moksha(&["classify", "--board", "50>50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("50>50"));

    assert_eq!(moksha(&["classify", "--board", "10>20,20>10"]).status.code(), Some(1));
    assert_eq!(moksha(&["classify", "--board", "5>x"]).status.code(), Some(1));
    assert_eq!(moksha(&["classify", "--board-file", "/nonexistent/board"]).status.code(), Some(1));
    assert_eq!(moksha(&["random", "-n", "50"]).status.code(), Some(1));

    let o = moksha(&["classify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(moksha(&["nonsense"]).status.code(), Some(2));
    assert_eq!(moksha(&["simulate", "--board", "", "--games", "0"]).status.code(), Some(2));
    assert_eq!(moksha(&["census", "--min-n", "5", "--max-n", "2"]).status.code(), Some(2));
}

#[test]
fn count_table() {
    let out = stdout(&moksha(&["count"]));
    assert!(out.contains("9506"));
    assert!(out.contains("43347360"));
    assert!(out.contains("7.6432896116e93"));
}

#[test]
fn board_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("delta.txt");
    std::fs::write(&path, "# delta\n2 99\n54 50\n55 32\n56 27\n57 23\n58 39\n59 41\n").unwrap();
    let v = json(&["classify", "--board-file", path.to_str().unwrap()]);
    assert_eq!(v["verdict"], "OccasionallyWinnable");
}

#[test]
fn json_documents() {
    let v = json(&["validate", "--board", "84>82,82>90"]);
    has_keys(&v, &["valid", "name", "components", "normalized", "normalized_board"]);
    assert_eq!(v["normalized_board"], "82>90,84>90");

    let v = json(&["name", "--board", "23>10,5>60"]);
    assert_eq!(v["name"], "2([5,23],[60,10])");

    let v = json(&["classify", "--board", DELTA]);
    has_keys(&v, &["verdict", "win_probability", "closed_classes", "certificate", "reachable"]);
    assert_eq!(v["verdict"], "OccasionallyWinnable");
    assert_eq!(v["certificate"]["form"], "OccasionallyForm");

    let v = json(&["structural", "--board", DELTA]);
    has_keys(
        &v,
        &[
            "barriers",
            "trap_regions",
            "escape_ladders",
            "ladder_passes",
            "ladder_bridges",
            "trappers",
            "flowchart_verdict",
            "agrees_with_ground_truth",
        ],
    );
    assert_eq!(v["trap_regions"][0]["m_sequence"], serde_json::json!([54, 23]));

    let v = json(&["stats", "--board", ""]);
    has_keys(&v, &["verdict", "win_probability", "expected_length", "length_cdf", "stationary_supports"]);
    let v = json(&["stats", "--board", U]);
    assert!(v["expected_length"].is_null());

    let v = json(&["count", "--max-n", "2"]);
    assert_eq!(v[1]["value"]["exact"], "9506");
    assert_eq!(v[2]["value"]["exact"], "43347360");

    let v = json(&["bounds"]);
    has_keys(&v, &["all_boards", "uncluttered", "shared_exits"]);
    assert_eq!(v["shared_exits"]["upper"]["approx"], "1.2801985919e134");

    let v = json(&["random", "-n", "4", "--count", "3", "--seed", "8"]);
    assert_eq!(v.as_array().unwrap().len(), 3);

    let v = json(&["simulate", "--board", DELTA, "--games", "20000", "--seed", "3"]);
    has_keys(&v, &["estimate", "standard_error", "outcomes", "length_cdf", "config"]);

    let v = json(&["census", "--min-n", "0", "--max-n", "5", "--samples", "50"]);
    has_keys(&v, &["config", "strata", "aggregate", "disagreements"]);
    assert_eq!(v["aggregate"]["ultimately_winnable_fraction"], 1.0);
}

#[test]
fn text_and_json_agree() {
    let text = stdout(&moksha(&["classify", "--board", DELTA]));
    let v = json(&["classify", "--board", DELTA]);
    assert_eq!(text.lines().next().unwrap(), v["verdict"]);
    let p: f64 = text.lines().nth(1).unwrap().trim_start_matches("win probability ").parse().unwrap();
    assert_eq!(p, v["win_probability"].as_f64().unwrap());

    let text = stdout(&moksha(&["name", "--board", U]));
    assert_eq!(text.trim(), json(&["name", "--board", U])["name"]);
}

#[test]
fn matrix_and_heatmap() {
    let out = stdout(&moksha(&["matrix", "--board", U, "--certificate"]));
    assert_eq!(out.lines().count(), 100);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g0.pgm");
    let o = moksha(&["heatmap", "--board", DELTA, "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap().len(), 15 + 10_000);
}

#[test]
fn seeded_output_is_byte_identical() {
    for args in [
        vec!["simulate", "--board", DELTA, "--games", "50000", "--seed", "42", "--json"],
        vec!["census", "--min-n", "6", "--max-n", "12", "--samples", "200", "--seed", "42", "--json"],
        vec!["random", "-n", "20", "--count", "5", "--seed", "42"],
    ] {
        let a = moksha(&args);
        let b = moksha(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}
