mod schema;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use keypoly::poly::PolyOps;
use keypoly::scalars::{Field, FpT, PAdic};
use keypoly_cli::{parse_polynomial, print_polynomial, ParseError};
use proptest::prelude::*;
use serde_json::{json, Value as Json};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn keypoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keypoly")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Json {
    let out = keypoly(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn tmpdir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("keypoly-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parser_examples() {
    let k = PAdic::new(2).unwrap();
    let c = |v: &[i64]| k.poly(v.iter().map(|&x| k.from_i64(x)).collect());
    assert_eq!(parse_polynomial(&k, "x^2 - 2").unwrap(), c(&[-2, 0, 1]));
    assert_eq!(parse_polynomial(&k, "(x+1)^2").unwrap(), c(&[1, 2, 1]));
    assert_eq!(parse_polynomial(&k, "x + y"), Err(ParseError::UnknownSymbol { name: "y".into(), pos: 4 }));
    assert!(matches!(parse_polynomial(&k, "p*x"), Err(ParseError::UnknownSymbol { .. })));
}

proptest! {
    #[test]
    fn rational_print_parse_round_trip(v in proptest::collection::vec((-9i64..10, 1i64..5), 0..7)) {
        let k = PAdic::new(3).unwrap();
        let f = k.poly(v.iter().map(|&(n, d)| k.div(&k.from_i64(n), &k.from_i64(d)).unwrap()).collect());
        let text = print_polynomial(&k, &f);
        prop_assert_eq!(parse_polynomial(&k, &text).unwrap(), f);
    }

    #[test]
    fn function_field_print_parse_round_trip(v in proptest::collection::vec((0u32..3, 0i64..4, 0i64..3), 0..5)) {
        let k = FpT::fp(3).unwrap();
        let f = k.poly(v.iter().map(|&(c, e, d)| {
            let num = k.mul(&k.from_i64(c as i64), &k.t_power(e));
            k.div(&num, &k.add(&k.t_power(d), &k.one())).unwrap()
        }).collect());
        let text = print_polynomial(&k, &f);
        prop_assert_eq!(parse_polynomial(&k, &text).unwrap(), f);
    }
}

#[test]
fn value_of_cubic_at_second_level() {
    let j = ok_json(&["value", "--chain", s(&data("sqrt2_chain.json")), "--poly", "x^3+x", "--level", "2"]);
    // x³ + x = 3x + x(x² − 2): min(ν(3x), ν(x) + ∞) = 1/2.
    assert_eq!(j["value"], json!({"num": 1, "den": 2}));
}

#[test]
fn newton_hull_of_cubic() {
    let j = ok_json(&["newton", "--chain", s(&data("x_chain.json")), "--poly", "x^3+2*x+8"]);
    let int = |n: i64| json!({"num": n, "den": 1});
    assert_eq!(j["vertices"], json!([[0, int(3)], [1, int(1)], [3, int(0)]]));
}

#[test]
fn trace_of_square_root_of_two() {
    let j = ok_json(&["trace", "--oracle", s(&data("sqrt2_oracle.json"))]);
    assert_eq!(j["status"], "Complete");
    assert_eq!(j["chain"]["chain"].as_array().unwrap().len(), 2);
    assert_eq!(j["chain"]["chain"][1]["beta"], "inf");
}

#[test]
fn exit_codes() {
    let chain = data("sqrt2_chain.json");
    assert_eq!(keypoly(&["value", "--chain", s(&chain), "--poly", "x + y"]).status.code(), Some(2));
    assert_eq!(keypoly(&["value", "--chain", s(&chain), "--poly", "x", "--level", "3"]).status.code(), Some(2));
    assert_eq!(keypoly(&["value", "--chain", "/nonexistent.json", "--poly", "x"]).status.code(), Some(2));
    assert_eq!(keypoly(&["frobnicate"]).status.code(), Some(2));
    let budget = keypoly(&["trace", "--oracle", s(&data("hensel_oracle.json")), "--value-threshold", "8", "--max-steps", "64"]);
    assert_eq!(budget.status.code(), Some(3));
    let j: Json = serde_json::from_slice(&budget.stdout).unwrap();
    assert_eq!(j["status"], "BudgetExhausted");
}

#[test]
fn config_file_drives_a_run() {
    let dir = tmpdir("config");
    let cfg = dir.join("run.json");
    std::fs::copy(data("sqrt2_chain.json"), dir.join("chain.json")).unwrap();
    std::fs::write(&cfg, json!({"chain": "chain.json", "poly": "x^2", "level": 1, "out": "reports"}).to_string()).unwrap();
    let out = keypoly(&["--config", s(&cfg), "value"]);
    assert_eq!(out.status.code(), Some(0));
    let j: Json = serde_json::from_str(&std::fs::read_to_string(dir.join("reports/value.json")).unwrap()).unwrap();
    assert_eq!(j["value"], json!({"num": 1, "den": 1}));

    std::fs::write(&cfg, json!({"chain": "chain.json", "polynomial": "x"}).to_string()).unwrap();
    assert_eq!(keypoly(&["--config", s(&cfg), "value"]).status.code(), Some(2));
}

#[test]
fn newton_writes_svg() {
    let dir = tmpdir("svg");
    let out = keypoly(&["newton", "--chain", s(&data("x_chain.json")), "--poly", "x^3+2*x+8", "--out", s(&dir)]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.join("newton.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("display only") && svg.contains("value=3.000000000000"));
    assert!(dir.join("newton.json").exists());
}

fn stall_trace(dir: &Path) -> PathBuf {
    let out = keypoly(&[
        "trace",
        "--oracle",
        s(&data("stall_oracle.json")),
        "--probes",
        s(&data("stall_probes.json")),
        "--max-steps",
        "4",
        "--value-threshold",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let p = dir.join("stall_trace.json");
    std::fs::write(&p, &out.stdout).unwrap();
    p
}

#[test]
fn limit_candidate_from_stalled_trace() {
    let dir = tmpdir("limit");
    let trace = stall_trace(&dir);
    let t: Json = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["status"], "StallDetected");
    let j = ok_json(&["limit", "--trace", s(&trace), "--window", "3", "--degree-cap", "4"]);
    assert_eq!(j["e0"], 1);
    assert_eq!(j["bound"], json!({"num": 20, "den": 1}));
    assert_eq!(j["text"], "x^2 + t^20*x + t^8");
    for c in ["weakly_affine", "critical_line", "exponent_divisibility"] {
        assert_eq!(j["checks"][c], true, "{c}");
    }
    assert_eq!(keypoly(&["limit", "--trace", s(&trace), "--window", "3", "--degree-cap", "1"]).status.code(), Some(2));
}

fn all_reports(dir: &Path) -> Vec<(&'static str, Vec<String>)> {
    let trace = stall_trace(dir);
    let sq = data("sqrt2_chain.json");
    vec![
        ("value", vec!["value".into(), "--chain".into(), s(&sq).into(), "--poly".into(), "x^3+x".into(), "--level".into(), "2".into()]),
        ("expand", vec!["expand".into(), "--chain".into(), s(&sq).into(), "--poly".into(), "x^5+x+1".into(), "--level".into(), "2".into()]),
        ("newton", vec!["newton".into(), "--chain".into(), s(&data("x_chain.json")).into(), "--poly".into(), "x^3+2*x+8".into()]),
        ("trace", vec!["trace".into(), "--oracle".into(), s(&data("hensel_oracle.json")).into(), "--max-steps".into(), "6".into(), "--seed".into(), "7".into()]),
        ("analyze", vec!["analyze".into(), "--chain".into(), s(&sq).into(), "--poly".into(), "x^4-4".into(), "--poly".into(), "x^3+x".into()]),
        ("limit", vec!["limit".into(), "--trace".into(), s(&trace).into(), "--window".into(), "3".into()]),
    ]
}

#[test]
fn reports_are_deterministic_and_match_schemas() {
    let dir = tmpdir("det");
    for (name, args) in all_reports(&dir) {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = keypoly(&a);
        let second = keypoly(&a);
        assert!(matches!(first.status.code(), Some(0 | 3)), "{name}: {}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout, "{name} output differs between runs");
        let doc: Json = serde_json::from_slice(&first.stdout).unwrap();
        schema::validate(&schema::load(name), &doc).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn input_files_match_schemas() {
    for (schema_name, file) in [
        ("chain", "sqrt2_chain.json"),
        ("chain", "x_chain.json"),
        ("oracle", "sqrt2_oracle.json"),
        ("oracle", "hensel_oracle.json"),
        ("oracle", "stall_oracle.json"),
        ("probes", "stall_probes.json"),
    ] {
        let doc: Json = serde_json::from_str(&std::fs::read_to_string(data(file)).unwrap()).unwrap();
        schema::validate(&schema::load(schema_name), &doc).unwrap_or_else(|e| panic!("{file}: {e}"));
    }
    let value = schema::load("value");
    assert!(schema::validate(&value, &json!({"level": 1, "poly": "x"})).is_err());
    assert!(schema::validate(&value, &json!({"level": 1, "poly": "x", "value": 0.5})).is_err());
    assert!(schema::validate(&value, &json!({"level": 0, "poly": "x", "value": "inf"})).is_err());
    assert!(schema::validate(&value, &json!({"level": 1, "poly": "x", "value": "inf", "extra": 1})).is_err());
}
