mod common;

use framelink::cli::run_args;
use serde_json::Value;
use std::process::Command;

fn go(args: &[String], seed: Option<&str>) -> framelink::cli::Outcome {
    run_args(std::iter::once("framelink".to_string()).chain(args.iter().cloned()), seed)
}

fn strs(a: &[&str]) -> Vec<String> {
    a.iter().map(|s| s.to_string()).collect()
}

#[test]
fn fibers_link_by_the_frame_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixtures(dir.path());
    let file = dir.path().join("fibers.txt").display().to_string();
    for p in [-2, 0, 3] {
        let out = go(&strs(&["--format", "json", "link", &file, "--frame", &p.to_string()]), None);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["matrix"][0][1], Value::from(p));
        assert_eq!(v["labels"], serde_json::json!(["a", "b"]));
    }
}

#[test]
fn both_methods_agree_on_a_random_pair() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixtures(dir.path());
    let file = dir.path().join("pair.txt").display().to_string();
    let out = go(&strs(&["link", &file, "--frame", "2", "--method", "both"]), None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    // Windings 2 and −1 shift the embedded number by 2·2·(−1).
    let chain = go(&strs(&["--format", "json", "link", &file, "--frame", "2", "--method", "chain"]), None);
    let emb = go(&strs(&["--format", "json", "link", &file, "--frame", "0", "--method", "embedding"]), None);
    let c: Value = serde_json::from_str(&chain.stdout).unwrap();
    let e: Value = serde_json::from_str(&emb.stdout).unwrap();
    assert_eq!(c["matrix"][0][1].as_i64().unwrap() - e["matrix"][0][1].as_i64().unwrap(), -4);
}

#[test]
fn chain_commands_echo_the_model_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixtures(dir.path());
    let scene = dir.path().join("scene.json").display().to_string();
    assert_eq!(go(&strs(&["chains", "check", &scene]), None).code, 0);
    let out = go(&strs(&["chains", "invariants", &scene]), None);
    assert_eq!(out.stdout, "F[g=0, n=[2], area +] = 5/2\n");
    let json = go(&strs(&["--format", "json", "chains", "invariants", &scene]), None);
    let v: Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(v["invariants"][0]["value"], Value::from("5/2"));
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 0\n").unwrap();
    let out = go(&strs(&["link", &bad.display().to_string()]), None);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("line 1"), "{}", out.stderr);
    let scene = dir.path().join("s.json");
    std::fs::write(&scene, r#"{"bounds": {"genus": 0, "boundaries": 1, "max_edges": 0}, "graphs": [{"graph": {"genus": 3, "vertices": [{"id": 0}]}}]}"#).unwrap();
    let out = go(&strs(&["chains", "check", &scene.display().to_string()]), None);
    assert_ne!(out.code, 0);
    assert_eq!(go(&strs(&["link", "x"]), Some("seven")).code, 1);
}

#[test]
fn knot_pushoff_round_trips_through_the_framing_command() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixtures(dir.path());
    let knot = dir.path().join("plain_knot.txt");
    for k in [-2, 1] {
        let out = go(&strs(&["knot", "pushoff", &knot.display().to_string(), "-k", &k.to_string()]), None);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let framed = dir.path().join(format!("framed{k}.txt"));
        std::fs::write(&framed, format!("{}\n{}", std::fs::read_to_string(&knot).unwrap(), out.stdout)).unwrap();
        let fr = go(&strs(&["knot", "frame", &framed.display().to_string()]), None);
        assert!(fr.stdout.starts_with(&format!("framing {k}\n")), "{}", fr.stdout);
    }
}

#[test]
fn suite_is_deterministic_in_process() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixtures(dir.path());
    for args in common::cli_suite(dir.path()) {
        let a = go(&args, Some("11"));
        let b = go(&args, Some("11"));
        assert_eq!(a.code, 0, "{args:?}: {}", a.stderr);
        assert_eq!((a.stdout, a.stderr), (b.stdout, b.stderr), "{args:?}");
    }
}

#[test]
fn binary_honours_the_seed_variable() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixtures(dir.path());
    let exe = env!("CARGO_BIN_EXE_framelink");
    let args = &common::cli_suite(dir.path())[1];
    let run = |seed: &str| Command::new(exe).args(args).env("FRAMELINK_SEED", seed).output().unwrap();
    let (a, b) = (run("5"), run("5"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap(), go(args, Some("5")).stdout);
    let bad = Command::new(exe).args(args).env("FRAMELINK_SEED", "-1").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
