use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levelbound"))
        .args(args)
        .env_remove("LEVELBOUND_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn validated(text: &str) -> Value {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let report: Value = serde_json::from_str(text).expect("valid JSON");
    if let Err(errors) = compiled.validate(&report) {
        let messages: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("schema violations: {messages:?}");
    }
    report
}

fn json(args: &[&str]) -> Value {
    validated(&stdout(args))
}

fn f64_at(v: &Value) -> f64 {
    v["f64"].as_f64().expect("finite number")
}

fn bound<'a>(report: &'a Value, method: &str) -> &'a Value {
    report["bounds"].as_array().unwrap().iter().find(|b| b["method"] == method).expect("method present")
}

#[test]
fn analyze_two_bit_onemax() {
    let r = json(&["analyze", "--function", "onemax", "--n", "2"]);
    assert_eq!(f64_at(&bound(&r, "digraph-product")["values"][2]), 4.0);
    assert_eq!(f64_at(&r["oracle"]["level_chain"][2]), 4.0);
    assert_eq!(f64_at(&r["oracle"]["full_state"][2]), 4.0);
    assert_eq!(r["manifest"]["command"], "analyze");
    assert_eq!(r["manifest"]["precision_bits"], 256);
}

#[test]
fn analyze_ratio_lower_coefficients_at_two_hundred() {
    let r = json(&["analyze", "--function", "onemax", "--n", "200", "--methods", "ratio-lower"]);
    assert_eq!(r["bounds"].as_array().unwrap().len(), 1);
    assert!(f64_at(&bound(&r, "ratio-lower")["coefficient_min"]) >= 0.4);
    assert!(r["oracle"]["full_state"].is_null());
}

#[test]
fn analyze_twomax1_ten_bits_is_strong() {
    let r = json(&["analyze", "--function", "twomax1", "--n", "10"]);
    assert_eq!(r["shortcuts"]["classification"], "strong");
}

#[test]
fn analyze_twomax1_twenty_bits_is_strong() {
    let r = json(&["analyze", "--function", "twomax1", "--n", "20"]);
    assert_eq!(r["shortcuts"]["classification"], "strong");
    assert!(r["shortcuts"]["strong"].as_array().unwrap().iter().any(|p| p["k"] == 11 && p["l"] == 1));
}

#[test]
fn analyze_preset_subdigraph_reports_paper_bounds() {
    let r = json(&["analyze", "--function", "deceptive", "--n", "10", "--subdigraph", "preset"]);
    assert_eq!(r["partition"]["kind"], "level_partition");
    assert_eq!(r["partition"]["top"], 6);
    assert!(bound(&r, "paper-analytic-lower")["values"][6].is_object());
    assert!(!r["discrepancies"].as_array().unwrap().is_empty());
    assert!(r["oracle"]["full_state"].is_null());
}

#[test]
fn analyze_is_reproducible_from_its_parameters() {
    let args = ["analyze", "--function", "fullydeceptive", "--n", "8", "--start", "0,0,0,0,0,0,0.5,0,0.5"];
    let mut a = json(&args);
    let mut b = json(&args);
    a["manifest"]["timestamp"] = Value::Null;
    b["manifest"]["timestamp"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn analyze_writes_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    stdout(&["analyze", "--function", "onemax", "--n", "6", "--out", path.to_str().unwrap()]);
    validated(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn coefficient_rows() {
    let csv = stdout(&["coefficients", "--function", "onemax", "--n", "200", "--method", "ratio-lower", "--k", "200"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,ell,method,value,log_value");
    assert_eq!(lines.len(), 200);
    let value = |line: &str| line.split(',').nth(3).unwrap().parse::<f64>().unwrap();
    assert!(value(lines[199]) > value(lines[198]));
    assert!(!csv.contains('\r'));
}

#[test]
fn coefficient_table_for_two_bits() {
    let csv = stdout(&["coefficients", "--function", "onemax", "--n", "2", "--method", "digraph-product"]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cells: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(&cells[..3], &["2", "1", "digraph-product"]);
    assert!((cells[3].parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-16);
    assert!((cells[4].parse::<f64>().unwrap() - (2.0f64 / 3.0).ln()).abs() < 1e-15);
    let mantissa = cells[3].split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
}

#[test]
fn coefficient_row_one_is_empty() {
    for method in ["type0", "viscosity", "recursive-lower", "conditional-upper"] {
        let csv = stdout(&["coefficients", "--function", "onemax", "--n", "5", "--method", method, "--k", "1"]);
        assert_eq!(csv, "k,ell,method,value,log_value\n");
    }
}

#[test]
fn coefficient_file_gets_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    stdout(&["coefficients", "--function", "twomax1", "--n", "8", "--method", "visit", "--csv", path.to_str().unwrap()]);
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("k,ell,method,value,log_value\n"));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "coefficients");
}

#[test]
fn unknown_method_is_a_usage_error() {
    let out = run(&["coefficients", "--function", "onemax", "--n", "4", "--method", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["analyze", "--function", "onemax", "--n", "4", "--subdigraph", "preset"][..],
        &["analyze", "--function", "twomax1", "--n", "9"],
        &["analyze", "--function", "onemax", "--n", "4", "--epsilon", "1.5"],
        &["simulate", "--function", "onemax", "--n", "4", "--start", "9"],
        &["analyze", "--function", "nosuch", "--n", "4"],
        &["analyze", "--n", "4"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn digraph_of_three_bit_onemax() {
    let dot = stdout(&["digraph", "--function", "onemax", "--n", "3"]);
    assert_eq!(dot.lines().filter(|l| l.contains("[label=\"S_")).count(), 4);
    assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 6);
    assert!(dot.contains("\"S_3\" [label=\"S_3 [w=0, f=0]\"]"));
    assert!(dot.contains("\"S_3\" -> \"S_2\" [label=\"4.44e-1\"]"));
}

#[test]
fn digraph_marks_the_weak_shortcut() {
    let dot = stdout(&["digraph", "--function", "fullydeceptive", "--n", "10", "--annotate-shortcuts"]);
    let arc = dot.lines().find(|l| l.contains("\"S_10\" -> \"S_0\"")).unwrap();
    assert!(arc.contains("color=red"));
    let plain = stdout(&["digraph", "--function", "fullydeceptive", "--n", "10"]);
    assert!(!plain.contains("color=red"));
}

#[test]
fn digraph_of_the_twomax1_preset() {
    let dot = stdout(&["digraph", "--function", "twomax1", "--n", "10", "--subdigraph", "preset"]);
    let nodes: Vec<&str> = dot.lines().filter(|l| l.contains("[label=\"S'_") && !l.contains("->")).collect();
    assert_eq!(nodes.len(), 7);
    for k in 0..=6 {
        assert!(dot.contains(&format!("\"S'_{k}\" [label=")));
    }
}

#[test]
fn oracle_modes_agree() {
    let r = json(&["oracle", "--function", "deceptive", "--n", "8", "--mode", "both"]);
    assert!(r["max_relative_gap"].as_f64().unwrap() <= 1e-12);
    assert!(f64_at(&r["full_state"]["lumpability_deviation"]) <= 1e-12);
    let exact = json(&["oracle", "--function", "deceptive", "--n", "8", "--mode", "both", "--rational"]);
    assert_eq!(exact["max_relative_gap"].as_f64(), Some(0.0));
}

#[test]
fn oracle_guard_exits_with_three() {
    assert_eq!(run(&["oracle", "--function", "onemax", "--n", "21", "--mode", "full"]).status.code(), Some(3));
    let rational = ["oracle", "--function", "onemax", "--n", "13", "--mode", "full", "--rational"];
    assert_eq!(run(&rational).status.code(), Some(3));
}

#[test]
fn simulation_from_the_optimum() {
    let r = json(&["simulate", "--function", "onemax", "--n", "10", "--start", "0", "--trials", "10", "--seed", "1"]);
    assert_eq!(r["mean"].as_f64(), Some(0.0));
    assert_eq!(r["manifest"]["seed"], 1);
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let args = ["simulate", "--function", "twomax1", "--n", "8", "--trials", "300", "--seed", "77"];
    assert_eq!(json(&args)["hitting_times"], json(&args)["hitting_times"]);
}

#[test]
fn appendix_checks_pass() {
    let r = json(&["verify-appendix", "--C", "5.44", "--n-list", "10,100,1000"]);
    assert_eq!(r["all_pass"], true);
    assert_eq!(r["results"].as_array().unwrap().len(), 3);
    let floors = json(&["verify-appendix", "--C", "e", "--n-list", "10,20", "--functions", "onemax,fd,tm1,de"]);
    assert_eq!(floors["coefficient_floors"].as_array().unwrap().len(), 8);
}

#[test]
fn precision_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_levelbound"))
        .args(["oracle", "--function", "onemax", "--n", "4"])
        .env("LEVELBOUND_PRECISION_BITS", "96")
        .output()
        .unwrap();
    let r = validated(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(r["manifest"]["precision_bits"], 96);
}
