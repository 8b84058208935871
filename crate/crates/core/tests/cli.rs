use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn bilanz(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bilanz"))
        .arg("run")
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BILANZ_SEED")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_code_zero_when_everything_scores() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bilanz(&["--input", path(&data("gray_firm.json"))], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(tmp.path().join("report.json").exists());
    assert!(tmp.path().join("rules.jsonl").exists());
    assert!(tmp.path().join("transactions.csv").exists());
    assert!(!tmp.path().join("report.csv").exists());
}

#[test]
fn exit_code_one_on_partial_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bilanz(
        &[
            "--input",
            path(&data("gray_firm.json")),
            path(&data("table1_feb2010.csv")),
            "--report",
            "json,csv",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("table1@2010-02"));
    assert!(tmp.path().join("report.csv").exists());
}

#[test]
fn exit_code_two_on_pipeline_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.csv");
    let out = bilanz(&["--input", path(&missing)], &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let out = bilanz(
        &[
            "--input",
            path(&data("gray_firm.json")),
            "--min-confidence",
            "1.5",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn flags_override_config_file_and_env() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        serde_json::json!({"input": [data("gray_firm.json")], "report": ["csv"], "k": 1})
            .to_string(),
    )
    .unwrap();
    let out = bilanz(
        &["--config", path(&cfg), "--report", "json"],
        &tmp.path().join("o1"),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(tmp.path().join("o1/report.json").exists());
    assert!(!tmp.path().join("o1/report.csv").exists());

    let out = bilanz(&["--config", path(&cfg)], &tmp.path().join("o2"));
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("o2/report.csv").exists());

    let with_env = Command::new(env!("CARGO_BIN_EXE_bilanz"))
        .args([
            "run",
            "--input",
            path(&data("gray_firm.json")),
            "--out",
            path(&tmp.path().join("o3")),
        ])
        .env("BILANZ_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_ne!(with_env.status.code(), Some(0));
    let overridden = Command::new(env!("CARGO_BIN_EXE_bilanz"))
        .args([
            "run",
            "--input",
            path(&data("gray_firm.json")),
            "--seed",
            "3",
            "--out",
            path(&tmp.path().join("o4")),
        ])
        .env("BILANZ_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(overridden.status.code(), Some(0));
}

#[test]
fn explicit_format_and_fractional_support() {
    let tmp = tempfile::tempdir().unwrap();
    let renamed = tmp.path().join("statement.txt");
    std::fs::copy(data("gray_firm.json"), &renamed).unwrap();
    let out = bilanz(&["--input", path(&renamed)], &tmp.path().join("a"));
    assert_eq!(out.status.code(), Some(2));
    let out = bilanz(
        &[
            "--input",
            path(&renamed),
            "--format",
            "json",
            "--min-support",
            "0.5",
            "--bins",
            "2",
        ],
        &tmp.path().join("b"),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
