use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn run_with(args: &[&str], arith: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cps-lab"));
    cmd.args(args).env_remove("CPS_LAB_ARITH");
    if let Some(a) = arith {
        cmd.env("CPS_LAB_ARITH", a);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_with(args, None)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn martingale_binomial_is_arbitrage_free() {
    let out = run(&["check", &fixture("binomial.json"), "--condition", "na-nf", "--certified"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["holds"], true);
    assert_eq!(r["result"]["certified"], true);
    assert_eq!(r["provenance"]["arithmetic"], "rational");
    assert_eq!(r["config"]["certified"], true);
    assert_eq!(r["provenance"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn prospective_counterexample_exits_one_with_witness() {
    let out = run(&["check", &fixture("counterexample.json"), "--condition", "na-ps"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["holds"], false);
    let w = &r["result"]["certificate"]["witness"];
    assert_eq!(w["time"], 1);
    assert_eq!(w["v_cost"], "1");
    let nf = run(&["check", &fixture("counterexample.json"), "--condition", "na-nf"]);
    assert_eq!(nf.status.code(), Some(0));
}

#[test]
fn arbitrage_is_reported_with_certificate() {
    let out = run(&["check", &fixture("arbitrage.json"), "--condition", "na-nf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["result"]["certificate"]["strategy"]["stock"].is_object());
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(run(&["envelopes", &fixture("malformed.json")]).status.code(), Some(2));
    assert_eq!(run(&["envelopes", &fixture("missing.json")]).status.code(), Some(2));
    assert_eq!(run(&["value", &fixture("spread.json"), &fixture("unknown_node.json")]).status.code(), Some(2));
    assert_eq!(run(&["check", &fixture("spread.json"), "--condition", "na-xx"]).status.code(), Some(2));
    assert_eq!(run_with(&["envelopes", &fixture("spread.json")], Some("decimal")).status.code(), Some(2));
    let certified = run_with(&["check", &fixture("spread.json"), "--condition", "na-nf", "--certified"], Some("float"));
    assert_eq!(certified.status.code(), Some(2));
}

#[test]
fn envelopes_report() {
    let out = run(&["envelopes", &fixture("spread.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["x_bid"]["r"], "1");
    assert_eq!(r["x_ask"]["r"], "3/2");
    assert_eq!(r["spread"]["r"], "1/2");
    assert_eq!(r["crossing"], Value::Array(vec![]));
}

#[test]
fn float_kernel_override() {
    let out = run_with(&["envelopes", &fixture("spread.json")], Some("float"));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["provenance"]["arithmetic"], "float");
    assert_eq!(r["result"]["x_ask"]["r"], 1.5);
}

#[test]
fn cps_inside_feasible_interval() {
    let out = run(&["find-cps", &fixture("spread.json"), "--certified"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["found"], true);
    assert_eq!(r["residuals"]["passes"], true);
    let s0: f64 = r["certificate"]["price"]["r"].as_str().unwrap().split('/').map(|x| x.parse::<f64>().unwrap()).fold(f64::NAN, |a, b| if a.is_nan() { b } else { a / b });
    assert!((1.0..1.5).contains(&s0), "root price {s0}");
    let strict = run(&["find-cps", &fixture("spread.json"), "--strict"]);
    assert_eq!(strict.status.code(), Some(0));
    assert!(report(&strict)["result"]["certificate"]["strict_slack"].is_string());
    assert_eq!(run(&["find-cps", &fixture("arbitrage.json")]).status.code(), Some(1));
}

#[test]
fn duality_is_consistent() {
    for f in ["spread.json", "arbitrage.json", "binomial.json", "counterexample.json"] {
        let out = run(&["duality", &fixture(f)]);
        assert_eq!(out.status.code(), Some(0), "{f}");
        assert_eq!(report(&out)["result"]["consistent"], true);
    }
}

#[test]
fn value_with_admissibility_constant() {
    let out = run(&["value", &fixture("spread.json"), &fixture("hold_then_sell.json"), "--M", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["bond"]["r"], "-3/2");
    assert_eq!(r["bond"]["u"], "0");
    assert_eq!(r["admissibility"]["admissible"], true);
    let tight = run(&["value", &fixture("spread.json"), &fixture("hold_then_sell.json"), "--M", "0"]);
    assert_eq!(tight.status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["check", &fixture("binomial.json"), "--condition", "na-ps", "--certified"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let sim = ["simulate", "--scenario", "larsson", "--n-scen", "20", "--grid", "100", "--seed", "5"];
    assert_eq!(run(&sim).stdout, run(&sim).stdout);
    let doob = ["doob", "--corpus", "random", "--count", "30", "--seed", "2"];
    assert_eq!(run(&doob).stdout, run(&doob).stdout);
}

#[test]
fn simulate_reports_excursions() {
    let out = run(&["simulate", "--scenario", "larsson", "--n-scen", "50", "--grid", "200", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["seed"], 1);
    let res = &r["result"];
    assert_eq!(res["scenarios"].as_array().unwrap().len(), 50);
    assert!(res["scenarios"][0]["excursions"].is_array());
    assert!(res["summary"]["jump"]["fraction_positive"].as_f64().unwrap() > 0.99);
    let adm = run(&["simulate", "--scenario", "admissibility", "--n-scen", "200", "--grid", "400", "--level", "4"]);
    assert_eq!(adm.status.code(), Some(0));
    assert!(report(&adm)["result"]["summary"]["admissibility"]["actual_constant"].as_f64().unwrap() <= 1.05);
    let brown = run(&["simulate", "--scenario", "brownian", "--n-scen", "5", "--grid", "100", "--paths"]);
    assert!(report(&brown)["result"]["scenarios"][0]["path"]["bid"].is_array());
    assert_eq!(run(&["simulate", "--scenario", "admissibility", "--grid", "101"]).status.code(), Some(2));
}

#[test]
fn doob_corpus_passes() {
    let out = run(&["doob", "--corpus", "random", "--count", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["passes"], true);
    assert!(r["worst_drift_ratio"]["ratio"].as_f64().unwrap() <= 1.0);
    let float = run_with(&["doob", "--count", "20"], Some("float"));
    assert_eq!(report(&float)["provenance"]["arithmetic"], "float");
}

#[test]
fn report_written_to_file() {
    let dir = std::env::temp_dir().join(format!("cps-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("env.json");
    let out = run(&["envelopes", &fixture("binomial.json"), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["config"]["command"], "envelopes");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn accept_quick_passes_and_mutation_fails() {
    let out = run(&["accept", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["all_passed"], true);
    assert_eq!(r["result"]["criteria"].as_array().unwrap().len(), 11);
    let mutated = run(&["accept", "--quick", "--mutate-envelopes"]);
    assert_eq!(mutated.status.code(), Some(1));
    let crit = report(&mutated)["result"]["criteria"].clone();
    assert_eq!(crit[1]["passed"], false);
}
