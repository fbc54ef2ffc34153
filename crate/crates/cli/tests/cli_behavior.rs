//! Behavioral tests for the command-line surface: flag validation, file
//! formats, label-space mapping, and error reporting. Everything runs on
//! deliberately small synthetic datasets so the whole file stays fast.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-bench"))
        .current_dir(root)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn run_ok(root: &Path, args: &[&str]) -> String {
    let output = run(root, args);
    assert!(
        output.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).unwrap()
}

fn run_err(root: &Path, args: &[&str]) -> String {
    let output = run(root, args);
    assert!(
        !output.status.success(),
        "command {args:?} should have failed but printed:\n{}",
        String::from_utf8_lossy(&output.stdout)
    );
    String::from_utf8(output.stderr).unwrap()
}

/// 24 samples, 25 wavelengths: big enough to classify, small enough to fit
/// in milliseconds.
fn small_dataset(root: &Path, name: &str) {
    run_ok(
        root,
        &["synth", "--per-class", "8", "--count", "25", "--out", name],
    );
}

#[test]
fn synthesis_is_deterministic_and_validates_flags() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    run_ok(root, &["synth", "--seed", "7", "--per-class", "4", "--count", "12", "--out", "a.csv"]);
    run_ok(root, &["synth", "--seed", "7", "--per-class", "4", "--count", "12", "--out", "b.csv"]);
    run_ok(root, &["synth", "--seed", "8", "--per-class", "4", "--count", "12", "--out", "c.csv"]);
    let a = fs::read(root.join("a.csv")).unwrap();
    let b = fs::read(root.join("b.csv")).unwrap();
    let c = fs::read(root.join("c.csv")).unwrap();
    assert_eq!(a, b, "same seed must give identical files");
    assert_ne!(a, c, "different seeds must give different files");

    let stderr = run_err(root, &["synth", "--classes", "1", "--out", "bad.csv"]);
    assert!(stderr.contains("classes"), "unhelpful message: {stderr}");
}

#[test]
fn split_floors_fractional_class_shares() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    run_ok(root, &["synth", "--per-class", "5", "--count", "10", "--out", "data.csv"]);
    let stdout = run_ok(
        root,
        &["split", "data.csv", "--train-out", "train.csv", "--test-out", "test.csv"],
    );
    let summary: Value = serde_json::from_str(&stdout).unwrap();
    // 0.7 of a 5-member class floors to 3.
    assert_eq!(summary["train_counts"], serde_json::json!([3, 3, 3]));
    assert_eq!(summary["test_counts"], serde_json::json!([2, 2, 2]));
    assert_eq!(summary["train_total"], 9);
    assert_eq!(summary["test_total"], 6);

    let lines = |name: &str| fs::read_to_string(root.join(name)).unwrap().lines().count();
    assert_eq!(lines("train.csv"), 10);
    assert_eq!(lines("test.csv"), 7);
}

#[test]
fn wide_data_refuses_plain_lda_training() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    run_ok(root, &["synth", "--per-class", "5", "--count", "60", "--out", "wide.csv"]);
    let stderr = run_err(root, &["train", "wide.csv", "--model", "lda", "--out", "lda.json"]);
    assert!(
        stderr.contains("SingularWithinScatter"),
        "error should name the failure mode: {stderr}"
    );
    assert!(!root.join("lda.json").exists(), "no model file on failure");

    // The regularized variants handle the same file.
    run_ok(root, &["train", "wide.csv", "--model", "dlda", "--out", "dlda.json"]);
    run_ok(root, &["train", "wide.csv", "--model", "slda", "--gamma", "0.5", "--out", "slda.json"]);
    run_ok(root, &["train", "wide.csv", "--model", "mlda", "--out", "mlda.json"]);
}

#[test]
fn evaluation_maps_classes_by_name_not_file_order() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_dataset(root, "data.csv");
    run_ok(root, &["train", "data.csv", "--model", "knn", "--out", "knn.json"]);
    let original = run_ok(root, &["evaluate", "knn.json", "data.csv"]);

    // Reverse the data rows: class_3 now appears first, so the file's own
    // label indices are permuted relative to the model's class order.
    let text = fs::read_to_string(root.join("data.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let mut permuted = String::from(header);
    for line in lines {
        permuted.push('\n');
        permuted.push_str(line);
    }
    permuted.push('\n');
    fs::write(root.join("permuted.csv"), permuted).unwrap();

    let reordered = run_ok(root, &["evaluate", "knn.json", "permuted.csv"]);
    assert_eq!(original, reordered, "metrics must not depend on row order");
}

#[test]
fn evaluation_report_round_trips_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_dataset(root, "data.csv");
    run_ok(root, &["train", "data.csv", "--model", "plsda", "--components", "2", "--out", "m.json"]);
    run_ok(root, &["evaluate", "m.json", "data.csv", "--out", "report.json"]);

    let text = fs::read_to_string(root.join("report.json")).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["format"], "report-v1");
    assert_eq!(parsed["model"], "PLS-DA");
    let confusion = parsed["confusion"].as_array().unwrap();
    assert_eq!(confusion.len(), 3);
    let row_sums: Vec<u64> = confusion
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum())
        .collect();
    assert_eq!(row_sums, vec![8, 8, 8], "row sums are the true class sizes");

    // Serialize the parsed value and parse it again: every number must
    // survive the trip bit for bit.
    let second: Value = serde_json::from_str(&parsed.to_string()).unwrap();
    assert_eq!(parsed, second);
}

#[test]
fn loadings_export_is_per_wavelength_with_exact_squares() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_dataset(root, "data.csv");
    run_ok(root, &["train", "data.csv", "--model", "plsda", "--components", "2", "--out", "m.json"]);
    run_ok(
        root,
        &["export", "--what", "loadings", "--model", "m.json", "--data", "data.csv", "--out", "l.csv"],
    );

    let text = fs::read_to_string(root.join("l.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("wavelength,loading_1,squared_loading_1,loading_2,squared_loading_2")
    );
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 25, "one row per wavelength");
    for line in body {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 5);
        assert_eq!(cells[2], cells[1] * cells[1], "squared column must be exact");
        assert_eq!(cells[4], cells[3] * cells[3], "squared column must be exact");
    }
}

#[test]
fn latent_exports_reject_other_model_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_dataset(root, "data.csv");
    run_ok(root, &["train", "data.csv", "--model", "knn", "--out", "knn.json"]);
    for what in ["loadings", "scores", "variance"] {
        let stderr = run_err(
            root,
            &["export", "--what", what, "--model", "knn.json", "--data", "data.csv", "--out", "x.csv"],
        );
        assert!(
            stderr.contains("IncompatibleExport"),
            "{what} export should refuse a KNN model: {stderr}"
        );
    }
}

#[test]
fn config_errors_name_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_dataset(root, "data.csv");
    run_ok(
        root,
        &["split", "data.csv", "--train-out", "train.csv", "--test-out", "test.csv"],
    );

    fs::write(root.join("bad.conf"), "[knn]\nneighbors = 4\n").unwrap();
    let stderr = run_err(
        root,
        &["benchmark", "train.csv", "test.csv", "--config", "bad.conf"],
    );
    assert!(
        stderr.contains("line 2") && stderr.contains("neighbors"),
        "error should cite the line and key: {stderr}"
    );

    fs::write(root.join("orphan.conf"), "k = 4\n").unwrap();
    let stderr = run_err(
        root,
        &["benchmark", "train.csv", "test.csv", "--config", "orphan.conf"],
    );
    assert!(stderr.contains("line 1"), "orphan key should cite line 1: {stderr}");
}

#[test]
fn config_hyperparameters_reach_the_benchmark_report() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_dataset(root, "data.csv");
    run_ok(
        root,
        &["split", "data.csv", "--train-out", "train.csv", "--test-out", "test.csv"],
    );
    fs::write(root.join("tuned.conf"), "[slda]\ngamma = 0.25\n\n[knn]\nk = 1\n").unwrap();
    run_ok(
        root,
        &["benchmark", "train.csv", "test.csv", "--config", "tuned.conf", "--out", "bench.json"],
    );

    let report: Value =
        serde_json::from_str(&fs::read_to_string(root.join("bench.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    let find = |model: &str| {
        rows.iter()
            .find(|r| r["model"] == model)
            .unwrap_or_else(|| panic!("no {model} row"))
    };
    assert_eq!(find("SLDA")["hyperparameters"]["gamma"], 0.25);
    assert_eq!(find("KNN")["hyperparameters"]["k"], 1);
}

#[test]
fn fixed_component_training_skips_the_search() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_dataset(root, "data.csv");
    let stdout = run_ok(
        root,
        &["train", "data.csv", "--model", "plsda", "--components", "3", "--out", "m.json"],
    );
    let summary: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary["format"], "train-v1");
    assert_eq!(summary["components"], 3);
    assert!(
        summary.get("scree").is_none(),
        "no search curve when the count is pinned"
    );

    let auto = run_ok(root, &["train", "data.csv", "--model", "plsda", "--out", "auto.json"]);
    let summary: Value = serde_json::from_str(&auto).unwrap();
    assert!(summary.get("scree").is_some(), "automatic selection reports its curve");
}
