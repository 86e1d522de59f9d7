//! Sampled bid/ask paths on a uniform grid: scenario generators, excursion
//! decomposition, dormant wealth, worst-case risk bounds, and the two worked
//! continuous-time examples.
//!
//! Grid semantics: paths are left-closed step functions and left limits are
//! approximated by the previous grid value. Statements that hold almost
//! surely in continuous time are checked on every sampled scenario at grid
//! scale.

pub mod examples;
pub mod excursions;
pub mod risk;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::corpus::instance_rng;

pub use examples::{admissibility_example_run, larsson_floor_witness, larsson_run, AdmissibilityReport, LarssonReport};
pub use excursions::{check_zero_classification, detect_excursions, dormant_transform, ExcursionDecomposition, ExcursionOptions};
pub use risk::{path_ledger, worst_case_risk_check, PathLedger, RiskReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// Scenario families.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    /// Bid `s0·exp(σB + (μ_bid − σ²/2)t)`; ask = bid·(1 + max(0, (μ_ask − μ_bid)t + κW)) with W independent.
    Brownian { horizon: f64, s0: f64, sigma: f64, mu_bid: f64, mu_ask: f64, kappa: f64 },
    /// Bid 0 before `t1`, `|B_{t1}| + B_t − B_{t1}` afterwards; ask = bid + 1.
    Larsson { horizon: f64, t1: f64 },
    /// Ask `3 + B_{t∧τ}`, bid 1 before τ and `(ask_τ + 2)/2` afterwards, on [0, 2].
    Admissibility,
    /// Binary mid-price walk with a Markov half-spread in {0, step/4, step/2}.
    SpreadWalk { mid0: f64, step: f64 },
    /// Constant frictionless price.
    Constant { price: f64, horizon: f64 },
}

impl Scenario {
    pub fn tag(&self) -> &'static str {
        match self {
            Scenario::Brownian { .. } => "brownian",
            Scenario::Larsson { .. } => "larsson",
            Scenario::Admissibility => "admissibility",
            Scenario::SpreadWalk { .. } => "spread_walk",
            Scenario::Constant { .. } => "constant",
        }
    }

    pub fn horizon(&self) -> f64 {
        match self {
            Scenario::Brownian { horizon, .. } | Scenario::Larsson { horizon, .. } | Scenario::Constant { horizon, .. } => *horizon,
            Scenario::Admissibility => 2.0,
            Scenario::SpreadWalk { .. } => 1.0,
        }
    }

    pub fn brownian_default() -> Self {
        Scenario::Brownian { horizon: 1.0, s0: 3.0, sigma: 0.3, mu_bid: 0.0, mu_ask: 0.0, kappa: 0.2 }
    }
    pub fn larsson_default() -> Self {
        Scenario::Larsson { horizon: 1.0, t1: 0.5 }
    }
    pub fn spread_walk_default() -> Self {
        Scenario::SpreadWalk { mid0: 10.0, step: 0.1 }
    }
}

fn finite_or_null<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(xs) => {
            let mapped: Vec<Option<f64>> = xs.iter().map(|x| x.is_finite().then_some(*x)).collect();
            mapped.serialize(s)
        }
    }
}

/// One scenario on the grid `t_i = i·h`, `i = 0..=N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledPath {
    pub tag: String,
    /// Index of the scenario's random stream.
    pub stream: u64,
    pub times: Vec<f64>,
    pub bid: Vec<f64>,
    pub ask: Vec<f64>,
    /// Actual bid and ask.
    pub x_bid: Vec<f64>,
    pub x_ask: Vec<f64>,
    /// Conditional minimum of the next actual bid given the previous grid
    /// point (infinite where unbounded; serialized as null).
    #[serde(serialize_with = "finite_or_null")]
    pub lower_env: Option<Vec<f64>>,
    #[serde(serialize_with = "finite_or_null")]
    pub upper_env: Option<Vec<f64>>,
}

impl SampledPath {
    /// Frictionless path with actual prices equal to the quotes.
    pub fn from_quotes(tag: &str, times: Vec<f64>, bid: Vec<f64>, ask: Vec<f64>) -> Self {
        SampledPath {
            tag: tag.into(),
            stream: 0,
            x_bid: bid.clone(),
            x_ask: ask.clone(),
            times,
            bid,
            ask,
            lower_env: None,
            upper_env: None,
        }
    }

    /// Path with a prescribed actual spread around a constant mid price of 1.
    pub fn from_spread(times: Vec<f64>, spread: &[f64]) -> Self {
        let bid: Vec<f64> = spread.iter().map(|s| 1.0 - s / 2.0).collect();
        let ask: Vec<f64> = spread.iter().map(|s| 1.0 + s / 2.0).collect();
        Self::from_quotes("synthetic", times, bid, ask)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Actual spread `x_ask − x_bid`.
    pub fn spread(&self) -> Vec<f64> {
        self.x_ask.iter().zip(&self.x_bid).map(|(a, b)| a - b).collect()
    }

    /// Violations of `bid ≤ ask` and `ask(T) > 0`.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, (b, a)) in self.bid.iter().zip(&self.ask).enumerate() {
            if b > a {
                out.push(format!("bid > ask at grid index {i}"));
            }
        }
        if self.ask.last().is_some_and(|a| *a <= 0.0) {
            out.push("terminal ask not positive".into());
        }
        out
    }
}

/// Uniform grid with `n_grid` steps on `[0, horizon]`.
pub fn uniform_grid(horizon: f64, n_grid: usize) -> Vec<f64> {
    let h = horizon / n_grid as f64;
    (0..=n_grid).map(|i| i as f64 * h).collect()
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Brownian path values `B_{t_i}` on the grid.
pub fn brownian<R: Rng>(rng: &mut R, n_grid: usize, h: f64) -> Vec<f64> {
    let sd = h.sqrt();
    let mut b = Vec::with_capacity(n_grid + 1);
    let mut x = 0.0;
    b.push(x);
    for _ in 0..n_grid {
        x += sd * normal(rng);
        b.push(x);
    }
    b
}

/// Grid index nearest to time `t`.
pub fn grid_index(t: f64, horizon: f64, n_grid: usize) -> usize {
    ((t / horizon) * n_grid as f64).round() as usize
}

fn check_params(scenario: &Scenario, n_grid: usize) -> Result<(), PathError> {
    if n_grid == 0 {
        return Err(PathError::BadParams("grid size must be positive".into()));
    }
    match scenario {
        Scenario::Brownian { horizon, s0, sigma, kappa, .. } => {
            if *horizon <= 0.0 || *s0 <= 0.0 || *sigma < 0.0 || *kappa < 0.0 {
                return Err(PathError::BadParams("brownian needs horizon, s0 > 0 and sigma, kappa ≥ 0".into()));
            }
        }
        Scenario::Larsson { horizon, t1 } => {
            if !(*t1 > 0.0 && t1 < horizon) {
                return Err(PathError::BadParams("larsson needs 0 < t1 < horizon".into()));
            }
        }
        Scenario::Admissibility => {
            if n_grid < 2 || n_grid % 2 != 0 {
                return Err(PathError::BadParams("admissibility needs an even grid size".into()));
            }
        }
        Scenario::SpreadWalk { mid0, step } => {
            if *step <= 0.0 || mid0 - (n_grid as f64 + 1.0) * step <= 0.0 {
                return Err(PathError::BadParams("spread walk must keep the mid price positive on every path".into()));
            }
        }
        Scenario::Constant { price, horizon } => {
            if *price <= 0.0 || *horizon <= 0.0 {
                return Err(PathError::BadParams("constant path needs a positive price and horizon".into()));
            }
        }
    }
    Ok(())
}

/// Scenario `stream` of a run seeded with `seed`.
pub fn simulate_path(scenario: &Scenario, n_grid: usize, seed: u64, stream: u64) -> Result<SampledPath, PathError> {
    check_params(scenario, n_grid)?;
    let mut rng = instance_rng(seed, stream);
    let horizon = scenario.horizon();
    let times = uniform_grid(horizon, n_grid);
    let h = horizon / n_grid as f64;
    let mut path = match scenario {
        Scenario::Brownian { s0, sigma, mu_bid, mu_ask, kappa, .. } => {
            let b = brownian(&mut rng, n_grid, h);
            let w = brownian(&mut rng, n_grid, h);
            let bid: Vec<f64> = times
                .iter()
                .zip(&b)
                .map(|(t, x)| s0 * (sigma * x + (mu_bid - sigma * sigma / 2.0) * t).exp())
                .collect();
            let ask: Vec<f64> = times
                .iter()
                .zip(&w)
                .zip(&bid)
                .map(|((t, wx), bd)| bd * (1.0 + ((mu_ask - mu_bid) * t + kappa * wx).max(0.0)))
                .collect();
            SampledPath::from_quotes("brownian", times, bid, ask)
        }
        Scenario::Larsson { t1, .. } => {
            let b = brownian(&mut rng, n_grid, h);
            let i1 = grid_index(*t1, horizon, n_grid);
            let at_jump = b[i1].abs();
            let bid: Vec<f64> = (0..=n_grid).map(|i| if i < i1 { 0.0 } else { at_jump + b[i] - b[i1] }).collect();
            let ask: Vec<f64> = bid.iter().map(|x| x + 1.0).collect();
            let lower: Vec<f64> = (0..=n_grid).map(|i| if i <= i1 { 0.0 } else { f64::NEG_INFINITY }).collect();
            let upper: Vec<f64> = (0..=n_grid).map(|i| if i < i1 { 1.0 } else { f64::INFINITY }).collect();
            let mut p = SampledPath::from_quotes("larsson", times, bid, ask);
            p.lower_env = Some(lower);
            p.upper_env = Some(upper);
            p
        }
        Scenario::Admissibility => {
            let run = examples::admissibility_path(&mut rng, n_grid);
            let n = n_grid + 1;
            let tau = run.tau_index;
            let ask_tau = 3.0 + run.b[tau];
            let ask: Vec<f64> = (0..n).map(|i| 3.0 + run.b[i.min(tau)]).collect();
            let after = (ask_tau + 2.0) / 2.0;
            let bid: Vec<f64> = (0..n).map(|i| if i < tau { 1.0 } else { after }).collect();
            let x_bid: Vec<f64> = (0..n).map(|i| if i < tau { 2.0 } else { after }).collect();
            let mut p = SampledPath::from_quotes("admissibility", times, bid, ask);
            p.x_bid = x_bid;
            p
        }
        Scenario::SpreadWalk { mid0, step } => {
            let levels = [0.0, step / 4.0, step / 2.0];
            let max_half = step / 2.0;
            let mut mid = vec![*mid0];
            let mut level = rng.random_range(0..3);
            let mut half = vec![levels[level]];
            for _ in 0..n_grid {
                let m = mid.last().expect("nonempty") + if rng.random_bool(0.5) { *step } else { -*step };
                mid.push(m);
                if rng.random_bool(0.5) {
                    level = rng.random_range(0..3);
                }
                half.push(levels[level]);
            }
            let bid: Vec<f64> = mid.iter().zip(&half).map(|(m, s)| m - s).collect();
            let ask: Vec<f64> = mid.iter().zip(&half).map(|(m, s)| m + s).collect();
            let lower: Vec<f64> = (0..=n_grid).map(|i| if i == 0 { bid[0] } else { mid[i - 1] - step - max_half }).collect();
            let upper: Vec<f64> = (0..=n_grid).map(|i| if i == 0 { ask[0] } else { mid[i - 1] + step + max_half }).collect();
            let mut p = SampledPath::from_quotes("spread_walk", times, bid, ask);
            p.lower_env = Some(lower);
            p.upper_env = Some(upper);
            p
        }
        Scenario::Constant { price, .. } => {
            let v = vec![*price; n_grid + 1];
            SampledPath::from_quotes("constant", times, v.clone(), v)
        }
    };
    path.stream = stream;
    Ok(path)
}

/// `n_scen` independent scenarios; scenario `k` uses random stream `k`.
pub fn simulate_paths(scenario: &Scenario, n_grid: usize, n_scen: usize, seed: u64) -> Result<Vec<SampledPath>, PathError> {
    if n_scen == 0 {
        return Err(PathError::BadParams("scenario count must be positive".into()));
    }
    check_params(scenario, n_grid)?;
    (0..n_scen as u64).into_par_iter().map(|k| simulate_path(scenario, n_grid, seed, k)).collect()
}

/// Mean, extremes and quantiles of a sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
    pub min: f64,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Summary { count: 0, mean: 0.0, std_error: 0.0, min: 0.0, p05: 0.0, p50: 0.0, p95: 0.0, max: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| sorted[((n - 1) as f64 * p).round() as usize];
        Summary {
            count: n,
            mean,
            std_error: (var / n as f64).sqrt(),
            min: sorted[0],
            p05: q(0.05),
            p50: q(0.5),
            p95: q(0.95),
            max: sorted[n - 1],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_path_is_frictionless() {
        let p = simulate_path(&Scenario::Constant { price: 2.0, horizon: 1.0 }, 10, 0, 0).unwrap();
        assert!(p.spread().iter().all(|s| *s == 0.0));
    }

    #[test]
    fn equal_drifts_give_zero_spread() {
        let s = Scenario::Brownian { horizon: 1.0, s0: 1.0, sigma: 0.2, mu_bid: 0.1, mu_ask: 0.1, kappa: 0.0 };
        for p in simulate_paths(&s, 50, 5, 3).unwrap() {
            assert!(p.spread().iter().all(|x| *x == 0.0));
            assert!(p.validate().is_empty());
        }
    }

    #[test]
    fn reproducible() {
        let s = Scenario::brownian_default();
        assert_eq!(simulate_paths(&s, 20, 3, 9).unwrap(), simulate_paths(&s, 20, 3, 9).unwrap());
        assert_ne!(simulate_path(&s, 20, 9, 0).unwrap(), simulate_path(&s, 20, 9, 1).unwrap());
    }

    #[test]
    fn larsson_bid_zero_before_jump() {
        let s = Scenario::larsson_default();
        for p in simulate_paths(&s, 100, 20, 1).unwrap() {
            assert!(p.x_bid[..50].iter().all(|x| *x == 0.0));
            assert!(p.x_bid[50] >= 0.0);
            assert_eq!(p.lower_env.as_ref().unwrap()[50], 0.0);
        }
    }

    #[test]
    fn spread_walk_bounds() {
        let s = Scenario::spread_walk_default();
        for p in simulate_paths(&s, 50, 20, 4).unwrap() {
            assert!(p.validate().is_empty());
            let lo = p.lower_env.as_ref().unwrap();
            let hi = p.upper_env.as_ref().unwrap();
            for i in 1..p.len() {
                assert!(lo[i] <= p.x_bid[i] && p.x_ask[i] <= hi[i]);
            }
        }
        assert!(simulate_path(&Scenario::SpreadWalk { mid0: 1.0, step: 0.1 }, 50, 0, 0).is_err());
    }

    #[test]
    fn bad_params() {
        assert!(simulate_paths(&Scenario::larsson_default(), 0, 1, 0).is_err());
        assert!(simulate_paths(&Scenario::Larsson { horizon: 1.0, t1: 1.5 }, 10, 1, 0).is_err());
        assert!(simulate_paths(&Scenario::larsson_default(), 10, 0, 0).is_err());
    }
}
