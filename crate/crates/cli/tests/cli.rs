use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn topictaxo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topictaxo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fast_config(dir: &Path) -> PathBuf {
    let path = dir.join("fast.ini");
    std::fs::write(&path, "[lda]\niterations = 200\nburn_in = 100\n\n[grid]\nk_max = 6\n").unwrap();
    path
}

#[test]
fn unreadable_corpus_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("nope.jsonl");
    let o = topictaxo(&["run", missing.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "[lda]\nalpah = 0.1\n").unwrap();
    let o = topictaxo(&["config", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_without_reference_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("planted40.jsonl");
    let o = topictaxo(&["compare", corpus.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_prints_parseable_ini() {
    let dir = tempfile::tempdir().unwrap();
    let o = topictaxo(&["config", "--seed", "7"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("seed = 7"), "{text}");
    let path = dir.path().join("round.ini");
    std::fs::write(&path, &text).unwrap();
    let again = topictaxo(&["config", "--config", path.to_str().unwrap()]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn full_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = fast_config(dir.path());
    let corpus = fixture("planted40.jsonl");
    let reference = fixture("planted40_reference.json");
    let o = topictaxo(&[
        "run",
        corpus.to_str().unwrap(),
        "--reference",
        reference.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = String::from_utf8(o.stdout).unwrap();
    assert_eq!(summary.lines().count(), 8, "{summary}");
    for name in ["manifest.json", "report.html", "kg_edges.csv", "graph.dot", "taxonomy_report.json"] {
        assert!(out.join(name).exists(), "{name}");
    }

    let o = topictaxo(&["report", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    let lines = String::from_utf8(o.stdout).unwrap();
    assert!(lines.lines().all(|l| l.ends_with(" ok")), "{lines}");
}

#[test]
fn report_on_empty_directory_lists_unavailable_sections() {
    let dir = tempfile::tempdir().unwrap();
    let o = topictaxo(&["report", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.matches("unavailable").count(), 5, "{text}");
}
