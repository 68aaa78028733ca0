use std::path::Path;
use std::process::{Command, Output};

fn run(cache: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fglwb"));
    match cache {
        Some(dir) => cmd.env("FGLWB_CACHE_DIR", dir),
        None => cmd.arg("--no-cache"),
    };
    cmd.args(args).output().expect("failed to launch fglwb")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn alpha_table_lists_known_coefficients() {
    let o = run(None, &["--max-degree", "3", "alpha"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("-1 * CP1"), "{out}");
    assert!(out.contains("4 * CP1*CP2 - 5/2 * CP1^3 - 3/2 * CP3"), "{out}");
}

#[test]
fn csv_and_jsonl_formats() {
    let o = run(None, &["--max-degree", "3", "--format", "csv", "alpha"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("i,j,weight,value"));
    assert_eq!(lines.next(), Some("\"1,1\",1,-1 * CP1"));

    let o = run(None, &["--max-degree", "3", "--format", "jsonl", "pairing"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!rows.is_empty());
    let a12 = rows.iter().find(|r| r["i,j"] == "1,2").unwrap();
    assert_eq!(a12["value"], "1 * CP1");
}

#[test]
fn parse_errors_exit_2_with_offset() {
    let o = run(None, &["--max-degree", "4", "--eval", "CP1*(", "chern"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("offset 4"), "{}", stderr(&o));
}

#[test]
fn domain_errors_exit_2() {
    let o = run(None, &["--max-degree", "4", "--eval", "CP5", "genus", "kh"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(None, &["--max-degree", "0", "alpha"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn chern_numbers_of_an_expression() {
    let o = run(None, &["--max-degree", "4", "--eval", "CP2 - 9/8*CP1^2", "chern"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.split_whitespace().eq(["c2", "-3/2"])), "{out}");
}

#[test]
fn verify_combinat_passes() {
    let o = run(None, &["--max-degree", "6", "verify", "combinat"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("checks passed"));
}

#[test]
fn cache_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(Some(dir.path()), &["--max-degree", "4", "alpha"]);
    assert_eq!(o.status.code(), Some(0));
    let file = dir.path().join("tables-n4.fglwb");
    assert!(file.exists());
    let first = std::fs::read(&file).unwrap();

    let o = run(Some(dir.path()), &["--max-degree", "3", "alpha"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&file).unwrap(), first);

    let o = run(Some(dir.path()), &["--max-degree", "4", "cache", "info"]);
    assert!(stdout(&o).contains("valid"), "{}", stdout(&o));
    let o = run(Some(dir.path()), &["cache", "clear"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!file.exists());
}

#[test]
fn no_cache_leaves_directory_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fglwb"))
        .env("FGLWB_CACHE_DIR", dir.path())
        .args(["--no-cache", "--max-degree", "3", "alpha"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn corrupted_cache_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(Some(dir.path()), &["--max-degree", "4", "alpha"]).status.code(), Some(0));
    let file = dir.path().join("tables-n4.fglwb");
    let text = std::fs::read_to_string(&file).unwrap();
    let tampered: String = text
        .lines()
        .map(|l| if l.starts_with("1,1 = ") { "1,1 = 5*CP1".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    assert_ne!(tampered, text);
    std::fs::write(&file, tampered).unwrap();

    let o = run(Some(dir.path()), &["--max-degree", "4", "verify", "fgl"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAIL]"));

    // ordinary commands warn and recompute
    let o = run(Some(dir.path()), &["--max-degree", "4", "alpha"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    assert!(stdout(&o).contains("-1 * CP1"));
}
