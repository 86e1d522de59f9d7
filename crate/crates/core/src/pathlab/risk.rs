//! Path ledger and worst-case risk bounds for admissible strategies.
//!
//! Holdings `stock[i]` are post-trade at grid point `i`; trades execute at the
//! actual bid and ask. With `A` the running maximum of the cost value and `M`
//! an admissibility constant, every grid point satisfies
//!
//! `|φ|·(X̄ − X̲) ≤ A + M + M·X̄`,
//!
//! and, when the predictable liquidation floor is nonnegative, the position
//! carried into step `i` satisfies
//!
//! `|φ_{i−1}|·X̂_i ≤ m_i + M + M·m_i`, with
//! `X̂_i = min(X̄_{i−1} − e_i, E_i − X̲_{i−1})` and
//! `m_i = max(A_{i−1}, X̄_{i−1}, E_i)`,
//!
//! where `e_i`, `E_i` are the conditional extremes of the next actual bid and
//! ask.

use serde::Serialize;

use crate::ledger::{cost_value, liquidation_value, minimal_shift, shifted_liquidation};

use super::SampledPath;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathLedger {
    pub bond: Vec<f64>,
    pub v_liq: Vec<f64>,
    pub v_cost: Vec<f64>,
    /// Running maximum of `v_cost`.
    pub a_sup: Vec<f64>,
    /// Minimal admissibility constant.
    pub m_star: f64,
}

/// Self-financing bond account from a zero initial position.
pub fn path_ledger(x_bid: &[f64], x_ask: &[f64], stock: &[f64]) -> PathLedger {
    let n = stock.len();
    let (mut bond, mut v_liq, mut v_cost, mut a_sup) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut b, mut prev, mut run, mut m_star) = (0.0f64, 0.0f64, f64::NEG_INFINITY, 0.0f64);
    for i in 0..n {
        let d = stock[i] - prev;
        b -= d.max(0.0) * x_ask[i] - (-d).max(0.0) * x_bid[i];
        prev = stock[i];
        let c = cost_value(&b, &stock[i], &x_bid[i], &x_ask[i]);
        run = run.max(c);
        m_star = m_star.max(minimal_shift(&b, &stock[i], &x_bid[i], &x_ask[i]));
        bond.push(b);
        v_liq.push(liquidation_value(&b, &stock[i], &x_bid[i], &x_ask[i]));
        v_cost.push(c);
        a_sup.push(run);
    }
    PathLedger { bond, v_liq, v_cost, a_sup, m_star }
}

/// Smallest `M ≥ 0` making the predictable liquidation floor nonnegative.
pub fn path_floor_shift(bond: &[f64], stock: &[f64], lower_env: &[f64], upper_env: &[f64]) -> f64 {
    (1..stock.len())
        .map(|i| minimal_shift(&bond[i - 1], &stock[i - 1], &lower_env[i], &upper_env[i]))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskBound {
    Spread,
    Predictable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskViolation {
    pub index: usize,
    pub bound: RiskBound,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskReport {
    pub m: f64,
    /// The strategy is `M`-admissible on the path.
    pub admissible: bool,
    /// The predictable floor is nonnegative (`None` without conditional envelopes).
    pub floor_nonnegative: Option<bool>,
    pub checked: usize,
    pub violations: Vec<RiskViolation>,
}

impl RiskReport {
    pub fn passes(&self) -> bool {
        self.admissible && self.violations.is_empty()
    }
}

const REL_TOL: f64 = 1e-9;

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + REL_TOL * (1.0 + rhs.abs())
}

/// Checks both bounds along `path` for `stock` at constant `m`. Nothing is
/// evaluated unless the strategy is `m`-admissible, and the predictable bound
/// only where the floor is nonnegative.
pub fn worst_case_risk_check(path: &SampledPath, stock: &[f64], m: f64) -> RiskReport {
    let (lo, hi) = (&path.x_bid, &path.x_ask);
    let led = path_ledger(lo, hi, stock);
    let admissible = (0..stock.len()).all(|i| shifted_liquidation(&led.bond[i], &stock[i], &m, &lo[i], &hi[i]) >= -REL_TOL);
    let mut report = RiskReport { m, admissible, floor_nonnegative: None, checked: 0, violations: Vec::new() };
    if !admissible {
        return report;
    }
    for i in 0..stock.len() {
        let lhs = stock[i].abs() * (hi[i] - lo[i]);
        let rhs = led.a_sup[i] + m + m * hi[i];
        report.checked += 1;
        if exceeds(lhs, rhs) {
            report.violations.push(RiskViolation { index: i, bound: RiskBound::Spread, lhs, rhs });
        }
    }
    if let (Some(e), Some(big_e)) = (&path.lower_env, &path.upper_env) {
        let floor_ok = (1..stock.len())
            .all(|i| shifted_liquidation(&led.bond[i - 1], &stock[i - 1], &m, &e[i], &big_e[i]) >= -REL_TOL);
        report.floor_nonnegative = Some(floor_ok);
        if floor_ok {
            for i in 1..stock.len() {
                let x_hat = (hi[i - 1] - e[i]).min(big_e[i] - lo[i - 1]);
                let mi = led.a_sup[i - 1].max(hi[i - 1]).max(big_e[i]);
                let lhs = stock[i - 1].abs() * x_hat;
                let rhs = mi + m + m * mi;
                report.checked += 1;
                if exceeds(lhs, rhs) {
                    report.violations.push(RiskViolation { index: i, bound: RiskBound::Predictable, lhs, rhs });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::instance_rng;
    use crate::pathlab::{simulate_path, Scenario};
    use rand::Rng;

    #[test]
    fn ledger_round_trip() {
        let bid = [1.0, 1.0, 2.0];
        let ask = [1.5, 1.5, 2.5];
        let l = path_ledger(&bid, &ask, &[1.0, 1.0, 0.0]);
        assert_eq!(l.bond, vec![-1.5, -1.5, 0.5]);
        assert_eq!(l.v_liq, vec![-0.5, -0.5, 0.5]);
        assert_eq!(l.a_sup, vec![0.0, 0.0, 0.5]);
        assert_eq!(l.m_star, 0.25);
    }

    #[test]
    fn bounds_hold_on_spread_walks() {
        for k in 0..50 {
            let p = simulate_path(&Scenario::spread_walk_default(), 40, 11, k).unwrap();
            let mut rng = instance_rng(12, k);
            let stock: Vec<f64> = (0..p.len()).map(|_| rng.random_range(-20..=20) as f64 / 4.0).collect();
            let led = path_ledger(&p.x_bid, &p.x_ask, &stock);
            let m = led.m_star.max(path_floor_shift(&led.bond, &stock, p.lower_env.as_ref().unwrap(), p.upper_env.as_ref().unwrap()));
            let r = worst_case_risk_check(&p, &stock, m);
            assert!(r.passes(), "{:?}", r.violations);
            assert_eq!(r.floor_nonnegative, Some(true));
        }
    }

    #[test]
    fn inadmissible_constant_is_reported() {
        let p = SampledPath::from_quotes("fixed", vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 2.0]);
        let stock = vec![-5.0, -5.0];
        let r = worst_case_risk_check(&p, &stock, 0.0);
        assert!(!r.admissible);
        assert_eq!(r.checked, 0);
    }
}
