//! End-to-end runs of the `citescope` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use citescope::corpus::{class_counts, load_provenance_corpus};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn citescope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_citescope"))
        .args(args)
        .env("CITESCOPE_THREADS", "1")
        .output()
        .expect("spawn citescope")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FAST: [&str; 8] = [
    "--epochs",
    "2",
    "--filters",
    "6",
    "--batch-size",
    "32",
    "--embedding-dim",
    "16",
];

fn with_fast<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(FAST).collect()
}

#[test]
fn evaluate_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eval");
    let (corpus, emb) = (fixture("small_function.jsonl"), fixture("embeddings16.txt"));
    let o = citescope(&with_fast(&[
        "evaluate",
        "--task",
        "function",
        "--model",
        "cnn",
        "--corpus",
        &corpus,
        "--embeddings",
        &emb,
        "--k",
        "5",
        "--runs",
        "2",
        "--seed",
        "13",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["metrics.json", "metrics.txt", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let metrics: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["function"]["runs"].as_array().unwrap().len(), 2);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([13, 14]));
    assert_eq!(manifest["config"]["k"], 5);
}

#[test]
fn unknown_subcommand_exits_2() {
    let o = citescope(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn unknown_flag_exits_2() {
    let o = citescope(&["evaluate", "--task", "function", "--model", "cnn", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    assert_eq!(citescope(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_corpus_exits_1_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = citescope(&[
        "evaluate",
        "--task",
        "function",
        "--model",
        "nb-baseline",
        "--corpus",
        "missing.jsonl",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.jsonl"), "{}", stderr(&o));
}

#[test]
fn malformed_corpus_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"id\": \"x\", \"citing_sentence\": \"s\", \"label\": \"Bogus\"}\n",
    )
    .unwrap();
    let o = citescope(&[
        "train",
        "--task",
        "function",
        "--model",
        "nb-baseline",
        "--corpus",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.jsonl"), "{}", stderr(&o));
}

#[test]
fn model_must_fit_task() {
    let dir = tempfile::tempdir().unwrap();
    let o = citescope(&[
        "train",
        "--task",
        "provenance",
        "--model",
        "cnn",
        "--corpus",
        &fixture("small_function.jsonl"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("dcnn");
    let o = citescope(&with_fast(&[
        "train",
        "--task",
        "provenance",
        "--model",
        "dcnn",
        "--corpus",
        &fixture("small_provenance.jsonl"),
        "--embeddings",
        &fixture("embeddings16.txt"),
        "--out",
        ckpt.to_str().unwrap(),
    ]));
    assert!(o.status.success(), "{}", stderr(&o));
    let loss = std::fs::read_to_string(ckpt.join("loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 3);
    assert!(ckpt.join("manifest.json").is_file());

    let input = dir.path().join("in.jsonl");
    std::fs::write(
        &input,
        "{\"id\":\"a\",\"citing_sentence\":\"f1 f2 c3 c4\",\"fragment\":\"f9 c3 c4\"}\n{\"id\":\"b\",\"citing_sentence\":\"f1\",\"fragment\":\"f2\"}\n",
    )
    .unwrap();
    let preds = dir.path().join("preds.jsonl");
    let o = citescope(&[
        "predict",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&preds)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "a");
    let p: Vec<f64> = serde_json::from_value(lines[0]["probabilities"].clone()).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    // A provenance model has no function head.
    let o = citescope(&[
        "predict",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--task",
        "function",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn baseline_training_writes_features() {
    let dir = tempfile::tempdir().unwrap();
    let o = citescope(&[
        "train",
        "--task",
        "provenance",
        "--model",
        "tree-baseline",
        "--annotations",
        &fixture("annotations.jsonl"),
        "--papers",
        &fixture("papers"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("features.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1493);
    assert!(dir.path().join("model.json").is_file());
}

#[test]
fn build_dataset_reproduces_fixture_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sentences = dir.path().join("sentences.txt");
    std::fs::write(&sentences, "We follow the approach of Smith (2001).\nIt rained.\n").unwrap();
    let o = citescope(&[
        "build-dataset",
        "--annotations",
        &fixture("annotations.jsonl"),
        "--papers",
        &fixture("papers"),
        "--sentences",
        sentences.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data = load_provenance_corpus(dir.path().join("provenance.jsonl")).unwrap();
    assert_eq!(class_counts(data.iter().map(|i| i.label)), vec![608, 885]);
    assert!(dir.path().join("candidates.jsonl").is_file());
    assert!(dir.path().join("manifest.json").is_file());
}

#[test]
fn compare_writes_significance() {
    let dir = tempfile::tempdir().unwrap();
    let o = citescope(&[
        "compare",
        "--task",
        "provenance",
        "--model",
        "tree-baseline",
        "--against",
        "tree-baseline",
        "--corpus",
        &fixture("small_provenance.jsonl"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "a model cannot be compared with itself");

    let o = citescope(&with_fast(&[
        "compare",
        "--task",
        "provenance",
        "--model",
        "dcnn",
        "--against",
        "tree-baseline",
        "--corpus",
        &fixture("small_provenance.jsonl"),
        "--embeddings",
        &fixture("embeddings16.txt"),
        "--k",
        "3",
        "--runs",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    assert!(o.status.success(), "{}", stderr(&o));
    let c: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("comparison.json")).unwrap()).unwrap();
    assert_eq!(c["task"], "provenance");
    assert_eq!(c["comparison"]["test"]["df"], 5);
    let table = std::fs::read_to_string(dir.path().join("metrics.txt")).unwrap();
    assert!(table.contains("dcnn") && table.contains("tree-baseline"));
}

#[test]
fn gradcheck_passes_and_fails_on_tolerance() {
    let o = citescope(&["gradcheck", "--model", "dcnn"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line: serde_json::Value = serde_json::from_slice(o.stdout.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(line["model"], "dcnn");
    assert_eq!(line["pass"], true);
    // An impossible tolerance must be reported as a failure.
    let o = citescope(&["gradcheck", "--model", "cnn", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
