//! Full acceptance suite: one PASS/FAIL line per criterion.

use std::io::Write;

use cps_lab::acceptance::{acceptance_suite, AcceptanceConfig, Scale, DEFAULT_SEED};

#[test]
fn acceptance_criteria() {
    let scale = match std::env::var("CPS_LAB_ACCEPT_SCALE").as_deref() {
        Ok("quick") => Scale::Quick,
        _ => Scale::Full,
    };
    let report = acceptance_suite(AcceptanceConfig::new(DEFAULT_SEED, scale));
    // Written to the process stdout so the lines survive libtest's output capture.
    let mut out = std::io::stdout().lock();
    writeln!(out).expect("stdout");
    for c in &report.criteria {
        writeln!(out, "{}  [{:.1} s]", c.line(), c.elapsed.as_secs_f64()).expect("stdout");
    }
    drop(out);
    let failed: Vec<u32> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn corrupted_envelopes_break_duality() {
    let cfg = AcceptanceConfig { mutate_envelopes: true, ..AcceptanceConfig::new(DEFAULT_SEED, Scale::Quick) };
    let envelopes = cps_lab::acceptance::run_criterion(1, &cfg).unwrap();
    let duality = cps_lab::acceptance::run_criterion(2, &cfg).unwrap();
    println!("{}\n{}", envelopes.line(), duality.line());
    assert!(!envelopes.passed);
    assert!(!duality.passed);
}
