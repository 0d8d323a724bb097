use std::process::{Command, Output};

use serde_json::Value;

const PROFILE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/four_class_profile.json");

fn vorace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vorace")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn aggregate_example_profile() {
    let borda = json(&vorace(&["aggregate", "--profile", PROFILE, "--rule", "borda"]));
    assert_eq!(borda["winner_label"], "c4");
    assert_eq!(borda["rule_scores"], serde_json::json!([6.0, 4.0, 1.0, 7.0]));
    for rule in ["plurality", "copeland", "kemeny"] {
        let r = json(&vorace(&["aggregate", "--profile", PROFILE, "--rule", rule]));
        assert_eq!(r["winner_label"], "c1", "{rule}");
    }
}

#[test]
fn malformed_profile_is_a_usage_error() {
    let dir = std::env::temp_dir().join(format!("vorace-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"m\": 3, \"rankings\": [[0, 1]]").unwrap();
    let out = vorace(&["aggregate", "--profile", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(vorace(&["aggregate", "--profile", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn unknown_rule_lists_valid_ones() {
    let out = vorace(&["run", "--data", "iris", "--rule", "veto"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("plurality, borda, copeland, kemeny"), "{err}");
}

#[test]
fn simulate_reports_rate() {
    let r = json(&vorace(&["simulate", "--model", "iid", "--p", "0.8", "--n", "3", "--m", "4", "--trials", "200000", "--seed", "1"]));
    let rate = r["rate"].as_f64().unwrap();
    let stderr = r["stderr"].as_f64().unwrap();
    assert!((rate - 0.896).abs() < 4.0 * stderr, "{rate}");
    assert_eq!(r["config"]["trials"], 200000);
    assert_eq!(vorace(&["simulate", "--p", "0.8", "--n", "3", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn theory_csv_covers_grid() {
    let out = vorace(&["theory", "--n", "10,50,100", "--m", "2", "--p-step", "0.05", "--compare", "binary,mu"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,m,p,method,value_exact,value_float,error");
    assert_eq!(lines.len(), 1 + 3 * 21 * 2);
    assert!(lines.iter().any(|l| l.starts_with("50,2,3/5,binary,") && l.contains(",0.9021")));
    for line in lines.iter().filter(|l| l.contains(",1,binary,") || l.contains(",1,mu,")) {
        assert!(line.ends_with(",1,1,"), "{line}");
    }
}

#[test]
fn run_emits_one_csv_row_per_rule() {
    let out = vorace(&["run", "--data", "wine", "--n", "5", "--folds", "3", "--rule", "plurality,borda,copeland,kemeny,sum", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("wine,sum,5,3,1,42,"));
}

#[test]
fn run_reads_csv_with_sibling_schema() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/iris.csv");
    let report = json(&vorace(&["run", "--data", fixture, "--n", "3", "--folds", "2"]));
    assert_eq!(report["rows"], 150);
    assert_eq!(report["reports"][0]["fold_f1"].as_array().unwrap().len(), 2);
    let out = vorace(&["run", "--data", fixture, "--schema", "/nonexistent.schema.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let out = vorace(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("aggregate"));
    assert_eq!(vorace(&[]).status.code(), Some(2));
}
