use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use elemnorm_core::hermitian::CMat;
use elemnorm_core::ElementaryOperator;
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elemnorm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn entries(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn write_operator(dir: &Path, name: &str, t: &ElementaryOperator) -> PathBuf {
    let v = json!({
        "n": t.dim(),
        "l": t.len(),
        "a": t.a().matrices().iter().map(entries).collect::<Vec<_>>(),
        "b": t.b().matrices().iter().map(entries).collect::<Vec<_>>(),
    });
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn value_of(out: &Output) -> f64 {
    json_stdout(out)["value"].as_f64().expect("numeric value")
}

#[test]
fn transpose_norm_is_one() {
    let dir = TempDir::new().unwrap();
    let p = write_operator(
        dir.path(),
        "transpose3.json",
        &ElementaryOperator::transpose(3),
    );
    let out = run(&["norm", "--input", p.to_str().unwrap(), "--json"]);
    let v = json_stdout(&out);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["method"], "tgm_formula");
    assert_eq!(v["restarts_used"], 64);
    assert_eq!(v["seed"], 0);
    assert!(v["certificate"]["xi"].is_array());
    assert!((v["bounds"]["haagerup"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!(v["bounds"]["cb"].is_null());
}

#[test]
fn first_row_knorm_is_square_root() {
    let dir = TempDir::new().unwrap();
    let p = write_operator(
        dir.path(),
        "s4.json",
        &ElementaryOperator::first_row_transpose(4),
    );
    let out = run(&[
        "knorm",
        "--k",
        "2",
        "--input",
        p.to_str().unwrap(),
        "--json",
        "--method",
        "both",
    ]);
    let v = json_stdout(&out);
    assert!((v["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert!(v["cross_check"]["relative_difference"].as_f64().unwrap() < 1e-4);
}

#[test]
fn cbnorm_of_transpose() {
    let dir = TempDir::new().unwrap();
    let p = write_operator(dir.path(), "t2.json", &ElementaryOperator::transpose(2));
    let v = json_stdout(&run(&[
        "cbnorm",
        "-i",
        p.to_str().unwrap(),
        "--json",
        "--restarts",
        "16",
    ]));
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["bounds"]["cb"], v["value"]);
}

#[test]
fn tgm_and_sharp_fixture() {
    let dir = TempDir::new().unwrap();
    let x = write(
        dir.path(),
        "x.json",
        r#"{"dim": 2, "entries": [[1.25,0],[1,0],[1,0],[1.25,0]]}"#,
    );
    let y = write(
        dir.path(),
        "y.json",
        r#"{"dim": 2, "entries": [[1,0],[0,0],[0,0],[0,0]]}"#,
    );
    let (x, y) = (x.to_str().unwrap(), y.to_str().unwrap());
    let value = value_of(&run(&["tgm", "--x", x, "--y", y, "--json"]));
    assert!((value - 1.118033988749895).abs() < 1e-12);
    let sharp = json_stdout(&run(&["sharp", "--x", x, "--y", y, "--json"]));
    assert!((sharp["trace"].as_f64().unwrap() - 0.6708203932499369).abs() < 1e-12);
}

#[test]
fn s1norm_of_orthogonal_vectors() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "v.json",
        r#"{"dim": 2, "vectors": [[[1,0],[0,0]], [[0,0],[0,2]]]}"#,
    );
    let value = value_of(&run(&["s1norm", "-i", p.to_str().unwrap(), "--json"]));
    assert!((value - 3.0).abs() < 1e-12);
}

#[test]
fn generated_instance_feeds_every_subcommand() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("gen.json");
    let p = p.to_str().unwrap();
    assert!(
        run(&["gen", "--n", "2", "--l", "2", "--seed", "3", "--output", p])
            .status
            .success()
    );
    let fast = ["--restarts", "4", "--json"];
    let commands: Vec<Vec<&str>> = vec![
        vec!["norm", "-i", p],
        vec!["norm-s1", "-i", p],
        vec!["oracle", "-i", p],
        vec!["knorm", "-i", p, "--k", "2"],
        vec!["knorm", "-i", p, "--k", "2", "--method", "factorial"],
        vec!["cbnorm", "-i", p],
        vec!["growth", "-i", p, "--kmax", "2"],
        vec!["independent", "-i", p],
        vec!["haagerup", "-i", p],
        vec!["haagerup", "-i", p, "--balance"],
        vec!["eqgap", "-i", p],
    ];
    for mut args in commands {
        args.extend_from_slice(&fast);
        let out = run(&args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        serde_json::from_slice::<Value>(&out.stdout).expect("JSON output");
    }
}

#[test]
fn gen_is_deterministic() {
    let a = run(&["gen", "--n", "3", "--l", "2", "--seed", "11"]);
    let b = run(&["gen", "--n", "3", "--l", "2", "--seed", "11"]);
    let c = run(&["gen", "--n", "3", "--l", "2", "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["a"].as_array().unwrap().len(), 2);
    assert_eq!(v["a"][0].as_array().unwrap().len(), 9);
}

#[test]
fn json_reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("op.json");
    let p = p.to_str().unwrap();
    run(&["gen", "--n", "3", "--l", "3", "--seed", "1", "--output", p]);
    let args = ["norm", "-i", p, "--json", "--restarts", "12", "--seed", "7"];
    let first = run(&args);
    let second = run(&args);
    let mut single = args.to_vec();
    single.extend_from_slice(&["--threads", "1"]);
    let third = run(&single);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn malformed_json_exits_one_with_position() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        "{\"dim\": 2,\n \"entries\": [[1,0],]}",
    );
    let y = write(
        dir.path(),
        "y.json",
        r#"{"dim": 2, "entries": [[1,0],[0,0],[0,0],[0,0]]}"#,
    );
    let out = run(&[
        "tgm",
        "--x",
        bad.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:2:"), "{err}");
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let x = write(dir.path(), "x.json", r#"{"dim": 1, "entries": [[1,0]]}"#);
    let y = write(
        dir.path(),
        "y.json",
        r#"{"dim": 2, "entries": [[1,0],[0,0],[0,0],[0,0]]}"#,
    );
    let out = run(&[
        "tgm",
        "--x",
        x.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let not_psd = write(dir.path(), "neg.json", r#"{"dim": 1, "entries": [[-1,0]]}"#);
    let out = run(&[
        "tgm",
        "--x",
        not_psd.to_str().unwrap(),
        "--y",
        not_psd.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let short = write(
        dir.path(),
        "op.json",
        r#"{"n": 2, "l": 1, "a": [[[1,0]]], "b": [[[1,0]]]}"#,
    );
    assert_eq!(
        run(&["norm", "-i", short.to_str().unwrap()]).status.code(),
        Some(1)
    );

    let missing = dir.path().join("missing.json");
    assert_eq!(
        run(&["norm", "-i", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn dimension_guard_follows_environment() {
    let dir = TempDir::new().unwrap();
    let p = write_operator(dir.path(), "id.json", &ElementaryOperator::identity(3));
    let p = p.to_str().unwrap();
    let guarded = bin()
        .args(["knorm", "-i", p, "--k", "3", "--restarts", "2"])
        .env("ELEMNORM_MAX_DIM", "8")
        .output()
        .unwrap();
    assert_eq!(guarded.status.code(), Some(1));
    let allowed = bin()
        .args(["knorm", "-i", p, "--k", "3", "--restarts", "2"])
        .env("ELEMNORM_MAX_DIM", "9")
        .output()
        .unwrap();
    assert!(allowed.status.success());
}

#[test]
fn check_reports_every_property() {
    let out = run(&["check", "--trials", "20", "--restarts", "4", "--json"]);
    let v = json_stdout(&out);
    let rows = v["properties"].as_array().unwrap();
    assert_eq!(rows.len(), 14);
    assert!(rows.iter().all(|r| r["violations"] == 0));
    assert_eq!(
        run(&["check", "--property", "nonsense"]).status.code(),
        Some(1)
    );
}
