use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::NamedTempFile;

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsp-euler")).args(args).output().unwrap()
}

fn run_on(sub: &str, input: &str, extra: &[&str]) -> Output {
    let f = file(input);
    let mut args = vec![sub, f.path().to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn count_examples() {
    for (tree, expected) in [
        ("P(B,B)", "1\n"),
        ("P(P(B,B),P(B,B))", "6\n"),
        ("# comment\nS(P(B,B), P(B,B))\n", "2\n"),
        ("D(P(B,B),P(B,B))", "2\n"),
    ] {
        let o = run_on("count", tree, &[]);
        assert_eq!(code(&o), 0, "{tree}");
        assert_eq!(stdout(&o), expected, "{tree}");
    }
}

#[test]
fn count_errors_have_distinct_codes() {
    let o = run_on("count", "B", &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not Eulerian"));
    assert_eq!(code(&run_on("count", "S(B,P(B,B))", &[])), 3);
    assert_eq!(code(&run_on("count", "S(B)", &[])), 2);
    assert_eq!(code(&run(&["count", "/nonexistent/tree"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn sample_digon_and_determinism() {
    let o = run_on("sample", "P(B,B)", &["--seed", "17", "--samples", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "1:+,2:-\n1:+,2:-\n1:+,2:-\n");

    let tree = "P(S(P(B,B),P(B,B)),P(B,B))";
    let a = run_on("sample", tree, &["--seed", "5", "--samples", "2"]);
    let b = run_on("sample", tree, &["--seed", "5", "--samples", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 2);
}

#[test]
fn sample_requires_seed() {
    assert_eq!(code(&run_on("sample", "P(B,B)", &[])), 1);
    assert_eq!(code(&run_on("sample", "P(B,B)", &["--seed", "1", "--samples", "0"])), 1);
}

#[test]
fn sample_vertices_mode() {
    let o = run_on("sample", "P(B,B)", &["--seed", "1", "--emit", "vertices"]);
    assert_eq!(stdout(&o), "0 1 0\n");
}

#[test]
fn double_digon_samples_cover_both_tours() {
    let o = run_on("sample", "S(P(B,B),P(B,B))", &["--seed", "2024", "--samples", "2000"]);
    let lines: std::collections::BTreeSet<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
}

#[test]
fn verify_reports() {
    let o = run_on("verify", "S(P(B,B),P(B,B))", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "PASS count engine=2 oracle=2\nPASS gamma(0) engine=1 oracle=1\nPASS gamma(2) engine=2 oracle=2\n"
    );
    let o = run_on("verify", "P(B,S(B,B))", &[]);
    assert!(stdout(&o).starts_with("PASS count engine=1 oracle=1\n"));

    let o = run_on("verify", "S(P(B,B),P(B,B))", &["--corrupt"]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("FAIL"));

    assert_eq!(code(&run_on("verify", "P(P(B,B),P(B,B))", &["--max-edges", "3"])), 1);
    assert_eq!(code(&run_on("verify", "P(B,B)", &["--max-edges", "15"])), 1);
}

#[test]
fn realize_and_recognize() {
    let o = run_on("realize", "P(B,B)", &[]);
    assert_eq!(stdout(&o), "terminals 0 1\nedge 1 0 1\nedge 2 0 1\n");

    let o = run_on("recognize", "terminals 0 1\nedge 1 0 1\nedge 2 0 1\n", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "P(B,B)\n");

    let k4 = "terminals 0 1\nedge 1 0 1\nedge 2 0 2\nedge 3 0 3\nedge 4 1 2\nedge 5 1 3\nedge 6 2 3\n";
    assert_eq!(code(&run_on("recognize", k4, &[])), 4);
    assert_eq!(code(&run_on("recognize", "terminals 0 1\nedge 1 0\n", &[])), 2);
}

#[test]
fn realize_recognize_realize_is_identity() {
    for tree in [
        "P(B,S(B,B))",
        "D(P(B,B),S(P(B,B),P(B,B)))",
        "S(D(P(B,B),S(P(B,B),P(B,B))),P(B,S(B,B)))",
    ] {
        let first = stdout(&run_on("realize", tree, &[]));
        let recognized = run_on("recognize", &first, &[]);
        assert_eq!(code(&recognized), 0);
        let second = stdout(&run_on("realize", &stdout(&recognized), &[]));
        assert_eq!(first, second, "{tree}");
    }
}

#[test]
fn stdin_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gsp-euler"))
        .args(["count", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"P(P(B,B),P(B,B))").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o), "6\n");
    assert!(Path::new(env!("CARGO_BIN_EXE_gsp-euler")).exists());
}
