use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::TempDir;

use instream::cli::aut::parse_header;
use instream::cli::{run_command, EXIT_FAILED, EXIT_INPUT, EXIT_OK};

const STOP_SPEC: &str = "foci f, g; methods m;\nX = S;\n";
const MIXED_SPEC: &str =
    "# stop only after a true reply\nfoci f, g;\nmethods m, n;\nX = (S <g.n> S) <f.m> D;\n";
const LOOP_SPEC: &str = "foci f; methods m;\nX = f.m ; Y;\nY = X <f.m> S;\n";

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("instream").chain(args.iter().copied());
    let code = run_command(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parse_prints_the_specification() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "loop.thr", LOOP_SPEC);
    let (code, out, err) = run(&["parse", s(&file)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("X = Y <f.m> Y;"), "{out}");

    let again = write(&dir, "again.thr", &out);
    let (code, reparsed, _) = run(&["parse", s(&again)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(reparsed, out);
}

#[test]
fn malformed_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "bad.thr", "foci f; methods m;\nX = <f.m> S;\n");
    let (code, out, err) = run(&["parse", s(&file)]);
    assert_eq!(code, EXIT_INPUT);
    assert!(out.is_empty());
    assert!(err.contains("2:5"), "{err}");

    let (code, _, _) = run(&["parse", s(&dir.path().join("missing.thr"))]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = run(&["verify", s(&file), "--protocol", "3"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn extract_prints_the_recursion_image() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "loop.thr", LOOP_SPEC);
    for mode in ["plain", "rct", "rct-alt"] {
        let (code, out, err) = run(&["extract", s(&file), "--mode", mode]);
        assert_eq!(code, EXIT_OK, "{mode}: {err}");
        assert!(out.lines().count() > 1, "{mode}: {out}");
    }
}

#[test]
fn server_convention_accepts_stop() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "stop.thr", STOP_SPEC);
    let (code, _, err) = run(&[
        "verify",
        s(&file),
        "--protocol",
        "1",
        "--termination",
        "server",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, _, _) = run(&[
        "verify",
        s(&file),
        "--protocol",
        "1",
        "--termination",
        "strict",
    ]);
    assert_eq!(code, EXIT_FAILED);
}

#[test]
fn faithful_receiver_report_carries_a_witness() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "mixed.thr", MIXED_SPEC);
    let report = dir.path().join("report.json");
    let (code, _, err) = run(&[
        "verify",
        s(&file),
        "--protocol",
        "2",
        "--receiver",
        "faithful",
        "--termination",
        "server",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, EXIT_FAILED, "{err}");
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["input_digest"].as_str().unwrap().len(), 64);
    let check = &json["checks"][0];
    assert_eq!(check["verdict"], "distinguished");
    assert_eq!(check["variant"], "faithful");
    let witness = &check["witness"];
    assert!(!witness["observation"].as_array().unwrap().is_empty());
    assert!(witness["right"]["enabled"].as_array().unwrap().is_empty());
    assert_eq!(witness["right"]["terminates"], false);

    let (code, _, _) = run(&[
        "verify",
        s(&file),
        "--protocol",
        "2",
        "--termination",
        "server",
    ]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn lts_export_header_matches_body() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "mixed.thr", MIXED_SPEC);
    let aut = dir.path().join("system.aut");
    let (code, _, err) = run(&[
        "lts",
        s(&file),
        "--system",
        "--protocol",
        "2",
        "--out",
        s(&aut),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&aut).unwrap();
    let (initial, transitions, states) = parse_header(&text).unwrap();
    assert_eq!(initial, 0);
    assert_eq!(text.lines().count(), transitions + 1);
    for line in text.lines().skip(1) {
        let target: usize = line
            .rsplit(',')
            .next()
            .unwrap()
            .trim_end_matches(')')
            .parse()
            .unwrap();
        assert!(target < states, "{line}");
    }

    let (code, out, _) = run(&["lts", s(&file)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"tick\""));
}

#[test]
fn fuzz_is_deterministic() {
    let args = [
        "fuzz",
        "--count",
        "20",
        "--max-depth",
        "3",
        "--seed",
        "7",
        "--protocol",
        "2",
        "--termination",
        "server",
    ];
    let (code, first, _) = run(&args);
    assert_eq!(code, EXIT_OK, "{first}");
    assert!(first.ends_with("20/20 equivalent\n"), "{first}");
    let (_, second, _) = run(&args);
    assert_eq!(first, second);

    let dir = TempDir::new().unwrap();
    let report = dir.path().join("fuzz.json");
    let (code, _, _) = run(&[
        "fuzz",
        "--count",
        "5",
        "--termination",
        "server",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, EXIT_OK);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["input_digest"].is_null());
    assert_eq!(json["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn help_and_version_exit_cleanly() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verify"));
    let (code, _, _) = run(&["--version"]);
    assert_eq!(code, EXIT_OK);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_INPUT);
}
