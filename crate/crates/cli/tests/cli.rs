use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn czono(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_czono")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &tempfile::TempDir, name: &str, src: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, src).unwrap();
    path.to_string_lossy().into_owned()
}

fn running() -> String {
    corpus().join("running.real").to_string_lossy().into_owned()
}

/// Bounds of the last `name in [lo, hi]` line.
fn last_range(text: &str, name: &str) -> (f64, f64) {
    let line = text.lines().rfind(|l| l.trim_start().starts_with(&format!("{name} in ["))).unwrap();
    let inner = line.split('[').nth(1).unwrap().trim_end_matches(']');
    let mut parts = inner.split(", ").map(|s| s.parse::<f64>().unwrap());
    (parts.next().unwrap(), parts.next().unwrap())
}

#[test]
fn running_example_text() {
    let o = czono(&["analyze", &running()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (lo, hi) = last_range(&text, "y");
    assert!(lo.abs() < 1e-9 && hi > 9.71 && hi < 9.72, "{text}");
    assert!(text.trim_end().lines().rev().nth(2).unwrap().starts_with("end:"));
}

#[test]
fn json_follows_the_schema() {
    let o = czono(&["analyze", &running(), "--json"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.last().unwrap()["id"], "end");
    for p in points {
        assert!(p["id"].is_string() && p["reachable"].is_boolean());
        for (_, v) in p["vars"].as_object().unwrap() {
            assert!(v["lo"].is_number() && v["hi"].is_number());
            let form = &v["form"];
            assert!(form["center"].is_number());
            for key in ["central", "perturbation"] {
                for (idx, c) in form[key].as_object().unwrap() {
                    assert!(idx.parse::<usize>().is_ok() && c.is_number());
                }
            }
        }
        let noise = &p["noise"];
        for key in ["central", "perturbation"] {
            for pair in noise[key].as_array().unwrap() {
                let pair = pair.as_array().unwrap();
                assert!(pair.len() == 2 && pair[0].as_f64() <= pair[1].as_f64());
            }
        }
    }
    assert!(doc.get("soundness").is_none());
    let again = serde_json::to_string(&doc).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&again).unwrap(), doc);
}

#[test]
fn corpus_has_no_violations() {
    for entry in std::fs::read_dir(corpus()).unwrap() {
        let path = entry.unwrap().path();
        let o = czono(&["analyze", path.to_str().unwrap(), "--check", "10000", "--seed", "42"]);
        let text = stdout(&o);
        assert!(o.status.success(), "{}: {text}", path.display());
        assert!(text.contains(" 0 violations"), "{}: {text}", path.display());
    }
}

#[test]
fn check_is_reported_in_json() {
    let o = czono(&["analyze", &running(), "--json", "--check", "200"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["soundness"]["samples"], 200);
    assert_eq!(doc["soundness"]["violations"], 0);
}

#[test]
fn rational_precision_is_exact() {
    let o = czono(&["analyze", &running(), "--precision", "rational", "--trace"]);
    let text = stdout(&o);
    assert!(text.contains("ε1 in [-1, -4/9]"), "{text}");
    assert!(text.contains("x in [0, 25/9]"), "{text}");
}

#[test]
fn baseline_and_unreachable_points() {
    let o = czono(&["analyze", &running(), "--baseline"]);
    let (lo, hi) = last_range(&stdout(&o), "y");
    assert!(lo == 0.0 && (hi - 102.0).abs() < 1e-9, "{lo} {hi}");
    let dir = tempfile::tempdir().unwrap();
    let dead = write(&dir, "dead.real", "real x = [0,1];\nif (x > 2) { x = 5; }\n");
    let text = stdout(&czono(&["analyze", &dead]));
    assert!(text.contains("L2:14:\n  unreachable"), "{text}");
}

#[test]
fn diagnostics_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.real", "real x = [0,1];\nx = ;\n");
    let o = czono(&["analyze", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.real:2:5:"), "{err}");
    let o = czono(&["analyze", &dir.path().join("missing.real").to_string_lossy()]);
    assert_eq!(o.status.code(), Some(1));
    let undeclared = write(&dir, "u.real", "real x = [0,1];\ny = x;\n");
    assert_eq!(czono(&["analyze", &undeclared]).status.code(), Some(1));
}

#[test]
fn symbol_cap_is_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let src = "real x = [0,1];\nreal y = x*x;\ny = y*x;\ny = y*y;\n";
    let path = write(&dir, "cap.real", src);
    let o = czono(&["analyze", &path, "--max-symbols", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(czono(&["analyze", &path]).status.success());
}

#[test]
fn bench_table() {
    let o = czono(&["bench", "--samples", "500"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).take(7).collect();
    let names: Vec<&str> = rows.iter().map(|r| r.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["cosine", "damped", "interl2", "interq1", "interq2", "itvpoly", "running"]);
    assert!(rows[6].contains("0.0000, 9.7160]") && rows[6].contains("[0.0000, 102.0000]"), "{text}");
    assert!(text.trim_end().ends_with("0 rows wider than the interval baseline"));
}

#[test]
fn bench_over_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "b.real", "// interest: y\nreal x = [-1,1];\nreal y = x*x;\n");
    write(&dir, "a.real", "real x = [0,1];\nreal y = x - x;\n");
    write(&dir, "notes.txt", "ignored");
    let text = stdout(&czono(&["bench", "--dir", dir.path().to_str().unwrap(), "--samples", "100"]));
    let names: Vec<&str> = text.lines().skip(1).take(2).map(|r| r.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["a", "b"]);
    assert_eq!(text.lines().count(), 4);
}
