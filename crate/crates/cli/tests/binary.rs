use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn idflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idflow")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"grid": {"resolution": [31, 31]}, "times": {"t_max": 1.5, "steps": 1500}}"#;

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "4")] {
        for cmd in ["qfm", "evolve", "field", "witness"] {
            let o = idflow(&[cmd, "--config", &config, "--out", out.to_str().unwrap(), "--threads", threads]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 20);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn config_errors_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for text in [
        r#"{"grid": {"resolution": [1, 31]}}"#,
        r#"{"times": {"t_max": "long"}}"#,
        r#"{"unknown": 1}"#,
        r#"{"times": {"snapshots": [9.0]}}"#,
    ] {
        let config = write_config(dir.path(), text);
        let o = idflow(&["field", "--config", &config, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!o.stderr.is_empty());
    }
    assert!(!out.exists());
}

#[test]
fn missing_config_and_bad_flags_are_usage_errors() {
    assert_eq!(idflow(&["evolve", "--config", "/nonexistent/idflow.json"]).status.code(), Some(2));
    assert_eq!(idflow(&["evolve", "--format", "png"]).status.code(), Some(2));
    assert_eq!(idflow(&["transmogrify"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let o = idflow(&["evolve", "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn default_witness_reports_backflow_for_every_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = idflow(&["witness", "--out", dir.path().to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let run = idflow_cli::emit::read_json(&dir.path().join("witness.json")).unwrap();
    let w = run.witness.unwrap();
    assert_eq!(w.points.len(), 4);
    for p in &w.points {
        assert!(p.backflow.intervals.len() >= 2);
        assert!(p.agreement.contained);
    }
}
