use std::path::Path;
use std::process::{Command, Output};

fn gapforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gaps_json_and_csv() {
    let v = json(&gapforge(&["gaps", "--lo", "100", "--hi", "130"]));
    let at = v
        .as_array()
        .unwrap()
        .iter()
        .find(|g| g["p"] == 113)
        .unwrap();
    assert_eq!(at["d"], 14);

    let out = gapforge(&["gaps", "--lo", "2", "--hi", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().collect::<Vec<_>>()[..2],
        ["p,d,ratio", "2,1,1.4426950408889634"]
    );
}

#[test]
fn records_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    let out = gapforge(&[
        "records",
        "--limit",
        "1000",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("n,p,d"));
    assert!(text.lines().last().unwrap().ends_with(",887,20"));
}

#[test]
fn smooth_counts() {
    let v = json(&gapforge(&["smooth", "--x", "100", "--y", "3"]));
    assert_eq!(v["exact"], 20);
}

#[test]
fn tuple_placement() {
    let v = json(&gapforge(&[
        "tuple",
        "--targets",
        "100,200,300",
        "--eta",
        "0.1",
    ]));
    assert_eq!(v["h"], serde_json::json!([101, 211, 307]));
    let out = gapforge(&["tuple", "--targets", "24,25", "--eta", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rankin_record_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let v = json(&gapforge(&[
        "rankin",
        "--L",
        "20",
        "--v",
        "3",
        "--y",
        "7",
        "--U",
        "40",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    assert!(v["z"].is_string());
    assert!(v["W"].is_string());
    assert_eq!(v["covered_prefix"], v["claimed_coverage"]);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next(), Some("stage,p,z_p,removed,remaining"));
}

#[test]
fn rankin_with_tuple_file_and_maynard() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = dir.path().join("h.txt");
    std::fs::write(&tuple, "12\n").unwrap();
    let v = json(&gapforge(&[
        "rankin",
        "--L",
        "30",
        "--v",
        "3",
        "--y",
        "7",
        "--U",
        "100",
        "--zbound",
        "13",
        "--strategy",
        "maynard",
        "--tuple",
        tuple.to_str().unwrap(),
    ]));
    assert_eq!(v["strategy"], "maynard");
    assert_eq!(v["H"], serde_json::json!([12]));
}

#[test]
fn rankin_validation_exit_code() {
    // the asymptotic schedule collapses at this size
    let out = gapforge(&["rankin", "--L", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gapforge(&["rankin", "--L", "20", "--v", "7", "--y", "3", "--U", "40"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_exit_code() {
    let out = gapforge(&["records", "--limit", "18446744073709551615"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn scan_twins() {
    let v = json(&gapforge(&[
        "scan", "--z", "5", "--w", "6", "--tuple", "0,2", "--lo", "10", "--hi", "100", "--m", "2",
    ]));
    let ns: Vec<u64> = v["hits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["n"].as_u64().unwrap())
        .collect();
    assert_eq!(ns, [11, 17, 29, 41, 59, 71]);
}

#[test]
fn explore_report() {
    let v = json(&gapforge(&[
        "explore", "--lo", "10", "--hi", "100000", "--grid", "0.5",
    ]));
    assert_eq!(v["normalizer"]["evaluated_at"], "p_n");
    assert!(v["estimate"]["sample_count"].as_u64().unwrap() > 9000);
    let out = gapforge(&["explore", "--lo", "10", "--hi", "1000", "--f", "g-log"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(gapforge(&["gaps", "--lo", "x"]).status.code(), Some(2));
    assert_eq!(
        gapforge(&["gaps", "--lo", "10", "--hi", "5"]).status.code(),
        Some(2)
    );
    assert!(!Path::new("/nonexistent").exists());
    let out = gapforge(&[
        "smooth",
        "--x",
        "10",
        "--y",
        "2",
        "--out",
        "/nonexistent/x.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
