use std::process::{Command, Output};

fn combgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combgap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_writes_point_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.txt");
    let out = combgap(&[
        "gen",
        "--n",
        "5",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().trim(), "5 2");
    assert_eq!(lines.count(), 5);
    let again = combgap(&["gen", "--n", "5", "--seed", "3"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn hk_reads_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.txt");
    std::fs::write(&path, "4 2\n0 0\n1 0\n1 1\n0 1\n").unwrap();
    let v = stdout_json(&combgap(&["hk", "--input", path.to_str().unwrap()]));
    assert!((v["value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let csv = combgap(&["hk", "--input", path.to_str().unwrap(), "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout)
        .unwrap()
        .starts_with("n,value"));
}

#[test]
fn combs_bound_sits_between_hk_and_bnb() {
    let combs = stdout_json(&combgap(&["combs", "--n", "10", "--seed", "4", "--c", "6"]));
    let bnb = stdout_json(&combgap(&["bnb", "--n", "10", "--seed", "4"]));
    let (hk, comb) = (
        combs["held_karp"].as_f64().unwrap(),
        combs["comb"].as_f64().unwrap(),
    );
    let tour = bnb["tour"]["length"].as_f64().unwrap();
    assert!(hk <= comb + 1e-9 && comb <= tour + 1e-9);
    assert_eq!(bnb["optimal"], true);
}

#[test]
fn bnb_writes_node_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("nodes.jsonl");
    let v = stdout_json(&combgap(&[
        "bnb",
        "--n",
        "9",
        "--bound",
        "comb",
        "--node-log",
        log.to_str().unwrap(),
    ]));
    let lines = std::fs::read_to_string(&log).unwrap();
    assert_eq!(
        lines.lines().count() as u64,
        v["stats"]["nodes_expanded"].as_u64().unwrap()
    );
    for line in lines.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn gadget_report_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("gadget.txt");
    let v = stdout_json(&combgap(&[
        "gadget",
        "--k",
        "8",
        "--c",
        "6",
        "--verify",
        "--out",
        pts.to_str().unwrap(),
    ]));
    assert_eq!(v["solution"]["triangles"].as_array().unwrap().len(), 4);
    assert!(v["gap"]["gap"].as_f64().unwrap() > 0.0);
    assert_eq!(v["lemmas"]["violated_comb"], serde_json::Value::Null);
    assert!(dir.path().join("gadget.meta.json").exists());
    assert!(std::fs::read_to_string(&pts).unwrap().starts_with("26 2"));
}

#[test]
fn constants_csv_and_persisted_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = combgap(&[
        "constants",
        "--n",
        "5-6",
        "--trials",
        "2",
        "--seed",
        "9",
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("# combgap constants schema"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("constants.csv")).unwrap(),
        csv
    );
    assert!(dir.path().join("constants.json").exists());
}

#[test]
fn growth_output_is_reproducible() {
    let args = ["growth", "--n", "6,7,8", "--trials", "10", "--seed", "5"];
    let a = combgap(&args);
    let b = combgap(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gap_runs_one_planted_trial() {
    let v = stdout_json(&combgap(&["gap", "--trials", "1", "--k", "8", "--c", "6"]));
    assert_eq!(v["kept"], 1);
    assert_eq!(v["all_improved"], true);
}

#[test]
fn invalid_arguments_exit_with_2() {
    assert_eq!(combgap(&["gadget", "--k", "3"]).status.code(), Some(2));
    assert_eq!(
        combgap(&["constants", "--trials", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(combgap(&["hk", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(combgap(&["constants", "--n", "9-3"]).status.code(), Some(2));
}

#[test]
fn io_failures_exit_with_4() {
    let out = combgap(&["hk", "--input", "/nonexistent/points.txt"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/points.txt"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3 2\n0 0\n1 x\n").unwrap();
    assert_eq!(
        combgap(&["hk", "--input", bad.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
}
