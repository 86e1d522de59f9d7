//! Command implementations. Each returns the report body and whether the
//! checked condition failed.

use serde_json::{json, Value};

use cps_lab::acceptance::{acceptance_suite, AcceptanceConfig, Scale};
use cps_lab::arbitrage::{ArbitrageCertificate, ArbitrageVerdict};
use cps_lab::corpus::{instance_rng, random_supermartingale};
use cps_lab::cps::{CpsBounds, CpsCertificate, CpsOutcome, CpsResiduals};
use cps_lab::doob::verify_moment_bounds;
use cps_lab::ledger::{execution_prices, predictable_liquidation_floor};
use cps_lab::pathlab::excursions::{check_zero_classification, detect_excursions, ExcursionOptions};
use cps_lab::pathlab::{admissibility_example_run, grid_index, simulate_paths, Scenario, Summary};
use cps_lab::market_io::{parse_market_value, parse_strategy, process_json};
use cps_lab::{
    check_na_nf, check_na_ps, compute_envelopes, duality_check, envelope_crossing, find_cps, is_admissible, portfolio_values,
    validate_market, wealth_ledger, Condition, CpsOptions, EventTree, Execution, MarketModel, Rational, Role, Scalar, Strategy,
    TreeProcess,
};

use crate::report::{CliError, Outcome};

/// Arithmetic kernel for tree commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arith {
    Rational,
    Float,
}

impl Arith {
    pub fn name(self) -> &'static str {
        match self {
            Arith::Rational => "rational",
            Arith::Float => "float",
        }
    }
}

/// Largest tree decided in rationals by default.
pub const EXACT_NODE_LIMIT: usize = 200;

/// Kernel choice: `CPS_LAB_ARITH` overrides the size-based default; certified
/// runs require rationals.
pub fn choose_arith(env: Option<&str>, certified: bool, nodes: usize) -> Result<Arith, CliError> {
    let forced = match env {
        None | Some("") => None,
        Some("rational") => Some(Arith::Rational),
        Some("float") => Some(Arith::Float),
        Some(other) => return Err(CliError::input(format!("CPS_LAB_ARITH must be `rational` or `float`, got `{other}`"))),
    };
    match forced {
        Some(Arith::Float) if certified => Err(CliError::input("certified mode needs rational arithmetic but CPS_LAB_ARITH=float")),
        Some(a) => Ok(a),
        None if certified || nodes <= EXACT_NODE_LIMIT => Ok(Arith::Rational),
        None => Ok(Arith::Float),
    }
}

pub fn parse_json(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("invalid JSON: {e}")))
}

pub fn node_count(spec: &Value) -> usize {
    spec.get("nodes").and_then(Value::as_array).map_or(0, Vec::len)
}

/// Parses and validates a market in the chosen arithmetic.
pub fn load_market<S: Scalar>(spec: &Value) -> Result<MarketModel<S>, CliError> {
    let model = parse_market_value::<S>(spec).map_err(CliError::input)?;
    let bad = validate_market(&model);
    if let Some(v) = bad.first() {
        return Err(CliError::input(format!("invalid market: {} at node `{}` ({} violations)", v.kind, v.label, bad.len())));
    }
    Ok(model)
}

fn labels<S: Scalar>(tree: &EventTree<S>, ids: &[cps_lab::NodeId]) -> Vec<String> {
    ids.iter().map(|&id| tree.label(id).to_string()).collect()
}

pub fn envelopes<S: Scalar>(model: &MarketModel<S>) -> Value {
    let env = compute_envelopes(model);
    let tree = &model.tree;
    let spread = TreeProcess::from_fn(tree, Role::Spread, |id| env.x_ask[id].clone() - env.x_bid[id].clone());
    json!({
        "x_bid": process_json(tree, &env.x_bid),
        "x_ask": process_json(tree, &env.x_ask),
        "spread": process_json(tree, &spread),
        "crossing": labels(tree, &envelope_crossing(&env)),
    })
}

fn strategy_json<S: Scalar>(tree: &EventTree<S>, s: &Strategy<S>) -> Value {
    json!({ "stock": process_json(tree, &s.stock), "bond": process_json(tree, &s.bond) })
}

fn certificate_json<S: Scalar>(tree: &EventTree<S>, c: &ArbitrageCertificate<S>) -> Value {
    json!({
        "strategy": strategy_json(tree, &c.strategy),
        "execution": c.execution,
        "witness": c.witness.as_ref().map(|w| json!({
            "time": w.time,
            "node": w.label,
            "v_liq": w.v_liq.to_json(),
            "v_cost": w.v_cost.to_json(),
        })),
    })
}

fn verdict_json<S: Scalar>(tree: &EventTree<S>, v: &ArbitrageVerdict<S>) -> Value {
    json!({
        "condition": v.condition,
        "holds": v.holds,
        "certified": v.certified,
        "optimum": v.optimum.as_ref().map(Scalar::to_json),
        "crossing": labels(tree, &v.crossing),
        "exact_retry": v.exact_retry,
        "certificate": v.certificate.as_ref().map(|c| certificate_json(tree, c)),
    })
}

pub fn value<S: Scalar>(model: &MarketModel<S>, strategy_text: &str, m: Option<&str>, exec: Execution) -> Result<(Value, bool), CliError> {
    let tree = &model.tree;
    let stock = parse_strategy(tree, strategy_text).map_err(CliError::input)?;
    let env = compute_envelopes(model);
    let prices = execution_prices(model, &env, exec);
    let strategy = wealth_ledger(model, &prices, &stock).map_err(CliError::input)?;
    let rep = portfolio_values(tree, &strategy, &env);
    let mut out = json!({
        "execution": exec,
        "stock": process_json(tree, &strategy.stock),
        "bond": process_json(tree, &strategy.bond),
        "v_liq": process_json(tree, &rep.v_liq),
        "v_cost": process_json(tree, &rep.v_cost),
        "running_max_cost": process_json(tree, &rep.a_sup),
        "minimal_admissibility_constant": rep.m_star.to_json(),
    });
    let mut violated = false;
    if let Some(m) = m {
        let m = S::parse(m).map_err(|e| CliError::input(format!("--M: {e}")))?;
        let adm = is_admissible(tree, &strategy, &env, &m);
        let floor = predictable_liquidation_floor(tree, &strategy, &env, &m);
        violated = !adm.admissible;
        out["admissibility"] = json!({
            "m": m.to_json(),
            "admissible": adm.admissible,
            "witness": adm.witness.map(|id| tree.label(id).to_string()),
            "predictable_floor": process_json(tree, &floor.floor),
            "floor_nonnegative": floor.passes,
            "floor_witness": floor.witness.map(|id| tree.label(id).to_string()),
        });
    }
    Ok((out, violated))
}

pub fn check<S: Scalar>(model: &MarketModel<S>, condition: Condition) -> Result<(Value, bool), CliError> {
    let env = compute_envelopes(model);
    let v = match condition {
        Condition::NaNf => check_na_nf(model, &env),
        Condition::NaPs => check_na_ps(model, &env),
    }
    .map_err(CliError::input)?;
    Ok((verdict_json(&model.tree, &v), !v.holds))
}

fn cps_json<S: Scalar>(tree: &EventTree<S>, c: &CpsCertificate<S>) -> Value {
    json!({
        "q_weights": process_json(tree, &c.weights),
        "price": process_json(tree, &c.price),
        "delta": c.delta.to_json(),
        "strict_slack": c.strict_slack.as_ref().map(Scalar::to_json),
        "bounds": c.bounds,
    })
}

fn residuals_json<S: Scalar>(r: &CpsResiduals<S>) -> Value {
    json!({
        "martingale_residual": r.martingale_residual.to_json(),
        "weight_sum_residual": r.weight_sum_residual.to_json(),
        "min_weight": r.min_weight.to_json(),
        "bound_violation": r.bound_violation.to_json(),
        "min_terminal_price": r.min_terminal_price.to_json(),
        "failures": r.failures,
        "passes": r.passes,
    })
}

fn outcome_json<S: Scalar>(tree: &EventTree<S>, o: &CpsOutcome<S>) -> Value {
    match o {
        CpsOutcome::Found(c) => json!({ "found": true, "certificate": cps_json(tree, c) }),
        CpsOutcome::NotFound { delta } => json!({ "found": false, "delta": delta.as_ref().map(Scalar::to_json) }),
    }
}

pub fn find<S: Scalar>(model: &MarketModel<S>, opts: CpsOptions) -> Result<(Value, bool), CliError> {
    let env = compute_envelopes(model);
    let out = find_cps(model, &env, opts).map_err(CliError::input)?;
    let mut body = outcome_json(&model.tree, &out);
    if let Some(c) = out.certificate() {
        let (lo, hi) = match c.bounds {
            CpsBounds::Envelopes => (&env.x_bid, &env.x_ask),
            CpsBounds::Raw => (&model.bid, &model.ask),
        };
        body["residuals"] = residuals_json(&cps_lab::verify_cps(&model.tree, c, lo, hi));
    }
    Ok((body, out.certificate().is_none()))
}

pub fn duality<S: Scalar>(model: &MarketModel<S>) -> Result<(Value, bool), CliError> {
    let env = compute_envelopes(model);
    let r = duality_check(model, &env).map_err(CliError::input)?;
    let tree = &model.tree;
    Ok((
        json!({
            "na_nf": verdict_json(tree, &r.na_nf),
            "cps": outcome_json(tree, &r.cps),
            "residuals": r.residuals.as_ref().map(residuals_json),
            "consistent": r.consistent,
        }),
        !r.consistent,
    ))
}

/// Options of the `simulate` command.
#[derive(Clone, Debug)]
pub struct SimulateArgs {
    pub scenario: Scenario,
    pub n_scen: usize,
    pub grid: usize,
    pub seed: u64,
    pub excursions: ExcursionOptions,
    pub include_paths: bool,
    /// Truncation level for the admissibility example.
    pub level: u32,
}

pub fn simulate(a: &SimulateArgs) -> Result<(Value, bool), CliError> {
    let paths = simulate_paths(&a.scenario, a.grid, a.n_scen, a.seed).map_err(CliError::input)?;
    let mut per = Vec::with_capacity(paths.len());
    let (mut counts, mut ambiguous, mut invalid) = (Vec::new(), 0usize, 0usize);
    for p in &paths {
        let spread = p.spread();
        let dec = detect_excursions(&p.times, &spread, &a.excursions);
        let zeros = check_zero_classification(&p.times, &spread, &a.excursions);
        let violations = p.validate();
        counts.push(dec.excursions.len() as f64);
        ambiguous += zeros.ambiguous.len();
        invalid += usize::from(!violations.is_empty());
        let mut entry = json!({
            "stream": p.stream,
            "excursions": dec.excursions,
            "zeros": { "right_interior": zeros.right_interior, "excursion_starts": zeros.excursion_starts, "ambiguous": zeros.ambiguous },
            "violations": violations,
        });
        if a.include_paths {
            entry["path"] = json!(p);
        }
        per.push(entry);
    }
    let terminal = |f: fn(&cps_lab::pathlab::SampledPath) -> f64| Summary::of(&paths.iter().map(f).collect::<Vec<_>>());
    let mut summary = json!({
        "excursions_per_scenario": Summary::of(&counts),
        "ambiguous_zeros": ambiguous,
        "invalid_scenarios": invalid,
        "terminal_bid": terminal(|p| *p.bid.last().expect("nonempty")),
        "terminal_ask": terminal(|p| *p.ask.last().expect("nonempty")),
    });
    match &a.scenario {
        Scenario::Larsson { horizon, t1 } => {
            let i1 = grid_index(*t1, *horizon, a.grid);
            let at_jump: Vec<f64> = paths.iter().map(|p| p.x_bid[i1]).collect();
            let positive = at_jump.iter().filter(|x| **x > 0.0).count() as f64 / at_jump.len() as f64;
            summary["jump"] = json!({
                "t1": t1,
                "x_bid_at_jump": Summary::of(&at_jump),
                "fraction_positive": positive,
                "analytic_mean": (2.0 * i1 as f64 * horizon / a.grid as f64 / std::f64::consts::PI).sqrt(),
                "lower_envelope_at_jump": 0.0,
            });
        }
        Scenario::Admissibility => {
            let r = admissibility_example_run(a.level, a.n_scen, a.grid, a.seed).map_err(CliError::input)?;
            summary["admissibility"] = json!(r);
        }
        _ => {}
    }
    Ok((json!({ "scenario": a.scenario, "summary": summary, "scenarios": per }), false))
}

pub fn doob(count: usize, seed: u64, depth: usize, branching: usize, arith: Arith) -> Result<(Value, bool), CliError> {
    let mut worst_a = (0.0f64, None::<usize>);
    let mut worst_m = (0.0f64, None::<usize>);
    let (mut a_viol, mut m_viol, mut doubled_viol, mut errors) = (Vec::new(), Vec::new(), 0usize, Vec::new());
    for k in 0..count {
        let c = random_supermartingale(&mut instance_rng(seed, k as u64), depth, branching);
        let rep = match arith {
            Arith::Rational => verify_moment_bounds(&c.tree, &c.y, &c.eps1, &c.eps2, &c.eps3)
                .map(|r| (r.a_holds, r.m_holds, r.energy_holds, r.ratio_a(), r.ratio_m())),
            Arith::Float => {
                let t = c.tree.convert::<f64>();
                let conv = |r: &Rational| r.as_f64();
                verify_moment_bounds(&t, &c.y.convert(), &conv(&c.eps1), &conv(&c.eps2), &conv(&c.eps3))
                    .map(|r| (r.a_holds, r.m_holds, r.energy_holds, r.ratio_a(), r.ratio_m()))
            }
        };
        match rep {
            Ok((a, m, e, ra, rm)) => {
                if !a {
                    a_viol.push(k);
                }
                if !m {
                    m_viol.push(k);
                }
                doubled_viol += usize::from(!e);
                if ra > worst_a.0 {
                    worst_a = (ra, Some(k));
                }
                if rm > worst_m.0 {
                    worst_m = (rm, Some(k));
                }
            }
            Err(e) => errors.push(json!({ "case": k, "error": e.to_string() })),
        }
    }
    let violated = !a_viol.is_empty() || !m_viol.is_empty() || !errors.is_empty();
    Ok((
        json!({
            "corpus": "random",
            "count": count,
            "max_depth": depth,
            "max_branching": branching,
            "passes": !violated,
            "drift_bound_violations": a_viol,
            "martingale_bound_violations": m_viol,
            "doubled_drift_bound_violations": doubled_viol,
            "worst_drift_ratio": { "ratio": worst_a.0, "case": worst_a.1 },
            "worst_martingale_ratio": { "ratio": worst_m.0, "case": worst_m.1 },
            "precondition_errors": errors,
        }),
        violated,
    ))
}

pub fn accept(seed: u64, quick: bool, mutate: bool) -> (Value, bool) {
    let cfg = AcceptanceConfig { seed, scale: if quick { Scale::Quick } else { Scale::Full }, mutate_envelopes: mutate };
    let report = acceptance_suite(cfg);
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    (json!(report), !report.all_passed)
}

/// Runs a tree command in the chosen kernel and tags the outcome.
pub fn in_kernel(
    arith: Arith,
    spec: &Value,
    exact: impl FnOnce(&MarketModel<Rational>) -> Result<(Value, bool), CliError>,
    float: impl FnOnce(&MarketModel<f64>) -> Result<(Value, bool), CliError>,
) -> Result<Outcome, CliError> {
    let (result, violated) = match arith {
        Arith::Rational => exact(&load_market::<Rational>(spec)?)?,
        Arith::Float => float(&load_market::<f64>(spec)?)?,
    };
    Ok(Outcome { arithmetic: arith.name(), result, violated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_choice() {
        assert_eq!(choose_arith(None, false, 10).unwrap(), Arith::Rational);
        assert_eq!(choose_arith(None, false, 500).unwrap(), Arith::Float);
        assert_eq!(choose_arith(None, true, 500).unwrap(), Arith::Rational);
        assert_eq!(choose_arith(Some("float"), false, 10).unwrap(), Arith::Float);
        assert!(choose_arith(Some("float"), true, 10).is_err());
        assert!(choose_arith(Some("double"), false, 10).is_err());
    }
}
