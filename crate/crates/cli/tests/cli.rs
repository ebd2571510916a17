use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tracecoef"));
    c.env_remove("TRACECOEF_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../docs/schemas/{name}.json"))
}

fn validate(name: &str, report: &Value) {
    let text = std::fs::read_to_string(schema_path(name)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let compiled = jsonschema::JSONSchema::options()
        .with_draft(jsonschema::Draft::Draft202012)
        .compile(&schema)
        .expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => Vec::new(),
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    assert!(
        msgs.is_empty(),
        "{name} report violates its schema:\n{}\n{report:#}",
        msgs.join("\n")
    );
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn finite_part_report() {
    let v = json_of(&["fp", "--n", "1", "--symbol", "1/|xi|^2"]);
    validate("fp", &v);
    assert_eq!(v["value"]["rational"], "2");
    assert_eq!(v["value"]["pi_power"], -1);
}

#[test]
fn c0_of_smoothing_symbol_is_its_finite_part() {
    let fp = json_of(&["fp", "--n", "1", "--symbol", "1/|xi|^2"]);
    let c0 = json_of(&["c0", "--n", "1", "--symbol", "1/|xi|^2"]);
    validate("c0", &c0);
    assert_eq!(c0["value"], fp["value"]);
    let c0 = json_of(&[
        "c0",
        "--n",
        "1",
        "--symbol",
        "1/|xi|^2",
        "--p",
        "3*|xi|^4; xi1^3; 2",
    ]);
    assert_eq!(c0["value"], fp["value"]);
}

#[test]
fn every_report_matches_its_schema() {
    validate(
        "res",
        &json_of(&["res", "--n", "1", "--symbol", "1/|xi|", "--p", "4*|xi|^2"]),
    );
    validate(
        "res",
        &json_of(&["res", "--n", "2", "--symbol", "xi1^2/|xi|^4"]),
    );
    validate(
        "logsym",
        &json_of(&["logsym", "--n", "1", "--p", "4*|xi|^2; 1", "--J", "3"]),
    );
    validate(
        "expand",
        &json_of(&["expand", "--n", "2", "--symbol", "xi1^2/|xi|^4", "--N", "2"]),
    );
    validate(
        "defect",
        &json_of(&[
            "defect", "--n", "1", "--symbol", "1/|xi|", "--p", "4*|xi|^2", "--p2", "|xi|^2",
        ]),
    );
    validate(
        "defect",
        &json_of(&[
            "defect",
            "--n",
            "1",
            "--symbol",
            "1/|xi|",
            "--p",
            "|xi|^2; 1",
            "--p2",
            "|xi|^4",
        ]),
    );
    validate(
        "fit",
        &json_of(&["fit", "--n", "1", "--symbol", "1/|xi|", "--m", "4"]),
    );
    validate(
        "verify",
        &json_of(&["verify", "--only", "parity,transition"]),
    );
}

#[test]
fn model_precondition_is_a_domain_error() {
    let out = run(&["expand", "--n", "1", "--symbol", "|xi|", "--m", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("model operator requires even m > sigma + n"),
        "{err}"
    );
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["fp", "--symbol", "1/|xi|^2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));

    let out = run(&["fp", "--n", "1", "--symbol", "xi1^2/|xi|^"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("symbol grammar"));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["fp", "--n", "one"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--only", "nothing"]).status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "n = 1\nsymbol = \"1/|xi|\"\nformat = \"csv\"\nprecision = 30\n",
    )
    .unwrap();
    let out = run(&["fp", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.starts_with("degree,branch,extension,value,approx"),
        "{text}"
    );

    let path = dir.path().join("out.json");
    let out = run(&[
        "fp",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--symbol",
        "1/|xi|^2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["value"]["rational"], "2");

    std::fs::write(&cfg, "dimension = 1\n").unwrap();
    assert_eq!(
        run(&["fp", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn precision_env_sets_the_default() {
    let digits = |out: Output| -> usize {
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["value"]["value"]
            .as_str()
            .unwrap()
            .trim_start_matches('-')
            .len()
    };
    let args = [
        "defect", "--n", "1", "--symbol", "1/|xi|", "--p", "4*|xi|^2", "--p2", "|xi|^2",
    ];
    let short = digits(
        bin()
            .args(args)
            .env("TRACECOEF_PRECISION", "20")
            .output()
            .unwrap(),
    );
    let long = digits(
        bin()
            .args(args)
            .env("TRACECOEF_PRECISION", "80")
            .output()
            .unwrap(),
    );
    assert!(long > short + 40, "{short} vs {long}");
    let flag = digits(
        bin()
            .args(args)
            .args(["--precision", "20"])
            .env("TRACECOEF_PRECISION", "80")
            .output()
            .unwrap(),
    );
    assert_eq!(flag, short);
    let bad = bin()
        .args(args)
        .env("TRACECOEF_PRECISION", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_filters_and_negative_control() {
    let v = json_of(&["verify", "--only", "parity"]);
    let keys: Vec<&str> = v["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["key"].as_str().unwrap())
        .collect();
    assert_eq!(keys, ["parity"]);

    let out = run(&["verify", "--only", "alpha,8", "--corrupt-alpha"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["criteria"][0]["key"], "alpha");
    assert_eq!(v["criteria"][0]["passed"], false);
    assert_eq!(v["criteria"][1]["passed"], true);
}

#[test]
fn pretty_and_csv_formats() {
    let out = run(&[
        "expand", "--n", "1", "--symbol", "1/|xi|", "--format", "csv",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("exponent,log_power,value,approx,provenance\n"));
    assert!(text.contains("-1,1,"));
    let out = run(&[
        "fit",
        "--n",
        "1",
        "--symbol",
        "1/|xi|",
        "--m",
        "4",
        "--format",
        "csv",
        "--ladder",
        "-1:1,-1,-2:1,-2,-3:1,-3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("exponent,log_power,fitted,symbolic,rel_error,verdict\n"));
    assert_eq!(text.lines().count(), 7);
    let out = run(&["fp", "--n", "1", "--symbol", "1/|xi|", "--format", "pretty"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("TR_x = "));
}
