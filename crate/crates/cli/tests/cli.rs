use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_multisum");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn make_op(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["make-op", "--out", path.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = run(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn f(v: &Value, path: &str) -> f64 {
    path.split('.').fold(v, |v, k| &v[k]).as_f64().unwrap_or_else(|| panic!("{path} missing"))
}

#[test]
fn constant_examples() {
    let v = json(&run(&["c-const", "--s", "2", "--q", "1", "--field", "complex"]));
    assert!((f(&v, "outputs.constant.value") - 0.886_226_925_452_758).abs() < 1e-12);
    assert!(f(&v, "outputs.relative_disagreement") < 1e-6);

    let v = json(&run(&["c-const", "--s", "2", "--q", "2", "--field", "complex"]));
    assert!((f(&v, "outputs.constant.value") - 1.0).abs() < 1e-12);

    assert_eq!(code(&run(&["c-const", "--s", "1.5", "--q", "2", "--field", "real"])), 2);
}

#[test]
fn pi_of_a_linear_form() {
    let dir = tempfile::tempdir().unwrap();
    let op = make_op(dir.path(), "form.json", &["--kind", "form", "--coeffs", "1,1", "--r", "3"]);
    let v = json(&run(&["pi", op.to_str().unwrap(), "--p", "1", "--seed", "3", "--samples", "400000"]));
    let (value, unc) = (f(&v, "outputs.estimate.value"), f(&v, "outputs.estimate.uncertainty"));
    let exact = 2f64.powf(2.0 / 3.0);
    assert!((value - exact).abs() <= 3.0 * unc, "{value} ± {unc}");
    assert!((f(&v, "outputs.basis_lower_bound") - exact).abs() < 1e-12);
    assert!(f(&v, "outputs.search.value") <= exact + 1e-9);
}

#[test]
fn pi_of_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let op = make_op(dir.path(), "phi.json", &["--kind", "phi", "--m", "2", "--n", "16", "--q", "1"]);
    let v = json(&run(&["pi", op.to_str().unwrap(), "--p", "1", "--seed", "5", "--samples", "200000", "--no-search"]));
    let (value, unc) = (f(&v, "outputs.estimate.value"), f(&v, "outputs.estimate.uncertainty"));
    assert!((value - 16.0).abs() <= 3.0 * unc, "{value} ± {unc}");
    assert_eq!(v["outputs"]["estimate"]["regime"]["kind"], "exact");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let form = make_op(dir.path(), "form.json", &["--kind", "form", "--coeffs", "1,1", "--r", "3"]);
    let form = form.to_str().unwrap();

    // p ≥ r' has no finite moment
    let out = run(&["pi", form, "--p", "1.6", "--seed", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("r'"));

    // domains with r < 2 have no stable integral formula
    let op = make_op(dir.path(), "r15.json", &["--kind", "random", "--n", "3", "--q", "1", "--r", "1.5", "--seed", "1"]);
    let out = run(&["pi", op.to_str().unwrap(), "--p", "1", "--seed", "1", "--samples", "1000", "--blocks", "8"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(code(&run(&["pi", form, "--p", "1"])), 2, "missing seed");
    assert_eq!(code(&run(&["pi", form, "--p", "abc", "--seed", "1"])), 2);
    assert_eq!(code(&run(&["pi", "/nonexistent/op.json", "--p", "1", "--seed", "1"])), 4);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format\": 3}").unwrap();
    assert_eq!(code(&run(&["pi", bad.to_str().unwrap(), "--p", "1", "--seed", "1"])), 2);

    let out = run(&["--out", "/nonexistent/dir/rec.json", "c-const", "--s", "2", "--q", "1"]);
    assert_eq!(code(&out), 4);

    assert_eq!(code(&run(&["make-op", "--kind", "random", "--n", "3"])), 2, "random needs a seed");
}

#[test]
fn limit_order_examples() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("sweep.csv");
    let v = json(&run(&[
        "limit-order", "--m", "2", "--r", "1.5", "--q", "1", "--n-list", "8,16,32,64", "--seed", "11", "--samples",
        "100000", "--table", table.to_str().unwrap(),
    ]));
    assert!((f(&v, "outputs.slope") - 2.0 / 3.0).abs() < 0.1);
    assert_eq!(v["outputs"]["pass"], true);
    let rows = std::fs::read_to_string(&table).unwrap();
    assert_eq!(rows.lines().count(), 5);
    assert!(rows.starts_with("n,estimate,uncertainty,seed,support"));

    let v = json(&run(&[
        "limit-order", "--m", "3", "--r", "1.2", "--q", "2", "--n-list", "8,16,32,64", "--seed", "12", "--samples",
        "100000",
    ]));
    assert!(f(&v, "outputs.slope").abs() < 0.1);
    assert_eq!(v["outputs"]["pass"], true);
}

#[test]
fn contraction_with_ones_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let op = make_op(dir.path(), "t.json", &["--kind", "random", "--m", "2", "--n", "3", "--q", "1.5", "--seed", "4"]);
    let v = json(&run(&["contraction", op.to_str().unwrap(), "--p", "1", "--alpha", "ones", "--seed", "2", "--samples", "50000"]));
    assert_eq!(f(&v, "outputs.ratio"), 1.0);

    let v = json(&run(&["contraction", op.to_str().unwrap(), "--p", "1", "--alpha", "random", "--seed", "2", "--samples", "50000"]));
    assert!(f(&v, "outputs.ratio") < 1.5);

    // ℓ_2 codomain with p = 1 is outside the conditions
    let op2 = make_op(dir.path(), "t2.json", &["--kind", "random", "--n", "3", "--q", "2", "--seed", "4"]);
    let out = run(&["contraction", op2.to_str().unwrap(), "--p", "1", "--alpha", "ones", "--seed", "2"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn inclusion_and_gamma_bound_run() {
    let v = json(&run(&[
        "inclusion", "--m", "2", "--q", "1", "--r", "2", "--n-list", "3,4", "--p1", "1.5", "--p2", "2.5", "--seed", "1",
        "--samples", "20000", "--blocks", "16",
    ]));
    assert_eq!(v["outputs"]["output"], "inclusion");
    assert_eq!(v["outputs"]["points"].as_array().unwrap().len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let op = make_op(dir.path(), "id.json", &["--kind", "phi", "--n", "5", "--q", "2"]);
    let v = json(&run(&["gamma-bound", op.to_str().unwrap(), "--p", "2", "--seed", "1", "--samples", "100000"]));
    assert_eq!(v["outputs"]["pass"], true);
    assert!((f(&v, "outputs.ratio") - 1.0).abs() < 0.02);
}

#[test]
fn records_replay_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let op = make_op(dir.path(), "t.json", &["--kind", "random", "--m", "2", "--n", "3", "--q", "1.5", "--seed", "9"]);
    let rec = dir.path().join("rec.json");
    let out = run(&[
        "--threads", "1", "--out", rec.to_str().unwrap(), "pi", op.to_str().unwrap(), "--p", "1", "--seed", "8",
        "--samples", "30000", "--blocks", "16", "--restarts", "1",
    ]);
    let first = json(&out);
    let stored = std::fs::read_to_string(&rec).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&stored).unwrap(), first);

    for threads in ["2", "8"] {
        let out = run(&["--threads", threads, "replay", rec.to_str().unwrap()]);
        let again = json(&out);
        assert_eq!(again["outputs"], first["outputs"]);
    }

    // tampering with an output makes replay fail
    let tampered = stored.replacen("\"basis_lower_bound\": ", "\"basis_lower_bound\": 1", 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, tampered).unwrap();
    assert_eq!(code(&run(&["replay", bad.to_str().unwrap()])), 1);
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let op = make_op(dir.path(), "t.json", &["--kind", "random", "--m", "2", "--n", "3", "--q", "1", "--seed", "2"]);
    let args = ["pi", op.to_str().unwrap(), "--p", "1", "--seed", "4", "--samples", "20000", "--blocks", "16", "--restarts", "1"];
    let as_json = json(&run(&args));
    let mut csv_args = vec!["--format", "csv"];
    csv_args.extend_from_slice(&args);
    let out = run(&csv_args);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut checked = 0;
    for line in text.lines().skip(1) {
        let (key, value) = line.split_once(',').unwrap();
        if key.starts_with("duration") || key.starts_with("config.format") {
            continue;
        }
        let node = key.split('.').fold(&as_json, |v, k| match v {
            Value::Array(a) => &a[k.parse::<usize>().unwrap()],
            _ => &v[k],
        });
        match node {
            Value::Number(n) if n.is_f64() => {
                assert_eq!(value.parse::<f64>().unwrap().to_bits(), n.as_f64().unwrap().to_bits(), "{key}");
                checked += 1;
            }
            Value::Number(n) => assert_eq!(value, n.to_string(), "{key}"),
            Value::String(s) => assert_eq!(value.trim_matches('"'), s, "{key}"),
            Value::Null => assert_eq!(value, "", "{key}"),
            Value::Bool(b) => assert_eq!(value, b.to_string(), "{key}"),
            other => panic!("{key}: unexpected {other}"),
        }
    }
    assert!(checked > 10);
}

#[test]
fn every_command_replays() {
    let dir = tempfile::tempdir().unwrap();
    let t = make_op(dir.path(), "t.json", &["--kind", "random", "--m", "2", "--n", "3", "--q", "1.5", "--seed", "3"]);
    let id = make_op(dir.path(), "id.json", &["--kind", "phi", "--n", "4", "--q", "2"]);
    let (t, id) = (t.to_str().unwrap(), id.to_str().unwrap());
    let small = ["--seed", "6", "--samples", "8000", "--blocks", "8"];
    let commands: Vec<Vec<&str>> = vec![
        vec!["c-const", "--s", "1.2", "--q", "0.7", "--field", "complex"],
        vec!["pi", t, "--p", "1.2", "--restarts", "1", "--rounds", "5"],
        vec!["limit-order", "--m", "2", "--r", "1.5", "--q", "1", "--n-list", "4,8,16,32"],
        vec!["contraction", t, "--p", "1", "--alpha", "flip", "--flip-index", "4"],
        vec!["inclusion", "--m", "1", "--q", "1", "--r", "2", "--n-list", "3,5", "--p1", "1", "--p2", "1.5"],
        vec!["gamma-bound", id, "--p", "1", "--field", "complex", "--sup-restarts", "4"],
    ];
    for (i, cmd) in commands.into_iter().enumerate() {
        let rec = dir.path().join(format!("rec{i}.json"));
        let mut args = vec!["--out", rec.to_str().unwrap()];
        args.extend(cmd.iter());
        if cmd[0] != "c-const" {
            args.extend(small.iter());
        }
        let first = json(&run(&args));
        let again = json(&run(&["replay", rec.to_str().unwrap()]));
        assert_eq!(first["outputs"], again["outputs"], "{cmd:?}");
    }
}
