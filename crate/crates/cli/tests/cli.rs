//! End-to-end checks against the built binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dforest"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn dforest");
    child.stdin.as_mut().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().expect("wait for dforest")
}

fn write_law(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const FOREST: &str = r#"{"schema":"dforest/forest/1","d":2,"trees":[{"color":1,"children":[{"color":1,"children":[{"color":2,"children":[]}]},{"color":2,"children":[]}]},{"color":2,"children":[]}]}"#;

const CRITICAL_LAW: &str =
    r#"{"schema":"dforest/law/1","d":2,"nu":[{"0,0":"1/2","0,2":"1/2"},{"0,0":"1/2","2,0":"1/2"}]}"#;

const FORCED_LAW: &str = r#"{"schema":"dforest/law/1","d":2,"nu":[{"0,1":"1"},{"0,0":"1"}]}"#;

#[test]
fn encode_decode_pipe_is_byte_identical() {
    let encoded = run_with_stdin(&["encode"], &format!("{FOREST}\n"));
    assert!(encoded.status.success());
    let decoded = run_with_stdin(&["decode"], &String::from_utf8(encoded.stdout).unwrap());
    assert!(decoded.status.success());
    let out = String::from_utf8(decoded.stdout).unwrap();
    assert_eq!(out.trim_end(), FOREST);
}

#[test]
fn decode_needs_roots() {
    let no_roots = r#"{"schema":"dforest/coding/1","d":2,"lengths":[1,1],"increments":[[[-1,1]],[[0,-1]]]}"#;
    let out = run_with_stdin(&["decode"], no_roots);
    assert_eq!(out.status.code(), Some(2));
    let out = run_with_stdin(&["decode", "--roots", "1"], no_roots);
    assert!(out.status.success());
}

#[test]
fn progeny_law_worked_example_is_one() {
    let dir = std::env::temp_dir().join("dforest-cli-test-progeny");
    std::fs::create_dir_all(&dir).unwrap();
    let law = write_law(&dir, "forced.json", FORCED_LAW);
    let out = bin()
        .args([
            "progeny-law",
            "--law",
            law.to_str().unwrap(),
            "--roots",
            "1,0",
            "--n",
            "1,1",
            "--k",
            "-1,1,0,-1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"exact\":\"1/1\""), "{text}");
}

#[test]
fn classify_reports_critical_regime() {
    let dir = std::env::temp_dir().join("dforest-cli-test-classify");
    std::fs::create_dir_all(&dir).unwrap();
    let law = write_law(&dir, "critical.json", CRITICAL_LAW);
    let out = bin().args(["classify", "--law", law.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"regime\":\"critical\""), "{text}");
    assert!(text.contains("\"irreducible\":true"), "{text}");
}

#[test]
fn cyclic_count_cross_display_agrees() {
    let encoded = run_with_stdin(&["encode"], &format!("{FOREST}\n"));
    let out = run_with_stdin(
        &["cyclic-count", "--r", "1,1"],
        &String::from_utf8(encoded.stdout).unwrap(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"agreement\":true"), "{text}");
}

#[test]
fn count_forests_with_oracle() {
    let dir = std::env::temp_dir().join("dforest-cli-test-count");
    std::fs::create_dir_all(&dir).unwrap();
    let sig = write_law(
        &dir,
        "sig.json",
        r#"{"schema":"dforest/signature/1","d":2,"r":[1,0],"n":[2,2],"k":[[-1,2],[0,-2]]}"#,
    );
    let out = bin()
        .args(["count-forests", "--formula", "plane", "--sig", sig.to_str().unwrap(), "--oracle"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"agreement\":true"), "{text}");
}

#[test]
fn simulate_is_deterministic_and_echoes_config() {
    let dir = std::env::temp_dir().join("dforest-cli-test-sim");
    std::fs::create_dir_all(&dir).unwrap();
    let law = write_law(&dir, "critical.json", CRITICAL_LAW);
    let args = [
        "simulate",
        "--law",
        law.to_str().unwrap(),
        "--roots",
        "1",
        "--seed",
        "11",
        "--replicas",
        "500",
        "--cap",
        "4000",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"seed\":11"), "{text}");
    assert!(text.contains("\"replicas\":500"), "{text}");
}

#[test]
fn verify_runs_twice_byte_identical() {
    let args = ["verify", "--cap", "4", "--seed", "42"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("result: 10 checks, 0 failed"), "{text}");
}

#[test]
fn usage_errors_exit_with_two() {
    let out = bin().args(["progeny-law", "--roots", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = run_with_stdin(&["encode"], "not json");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lagrange_coeff_three_way_display() {
    let dir = std::env::temp_dir().join("dforest-cli-test-lagrange");
    std::fs::create_dir_all(&dir).unwrap();
    let law = write_law(&dir, "critical.json", CRITICAL_LAW);
    let out = bin()
        .args(["lagrange-coeff", "--law", law.to_str().unwrap(), "--roots", "1,0", "--n", "1,2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"equal\":true"), "{text}");
    assert!(text.contains("\"fixed_point\":\"1/8\""), "{text}");
}
