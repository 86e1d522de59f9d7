//! The two worked continuous-time examples, run by Monte Carlo.
//!
//! Admissibility example on `[0, 2]`: `U` uniform on (0,1), `m` the running
//! minimum of `B`, `τ = inf{t : m_t = −U} ∧ 1`. Ask `3 + B_{t∧τ}`; bid 1
//! before τ and `(ask_τ + 2)/2` from τ on; the actual bid is 2 before τ. The
//! strategy holds `f((−m_t) ∧ (1 − 1/n))` shares on `(0, τ)`, with
//! `f(x) = (1−x)^{-1/2} − 1`, and sells at τ. Valued at the quoted prices it
//! needs the admissibility constant `M_n = (1 − √(1−a) + f(a))/2`,
//! `a = 1 − 1/n`, which grows without bound; valued at the actual prices a
//! constant of at most 1/3 suffices.
//!
//! Larsson's example: bid 0 before `t1` and `|B_{t1}| + B_t − B_{t1}` after,
//! so the actual bid jumps at `t1` to a strictly positive value while its
//! conditional lower bound given the past stays 0.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::instance_rng;
use crate::ledger::{minimal_shift, shifted_liquidation};

use super::{grid_index, PathError, Summary};

/// Brownian path of the admissibility example, frozen from τ on.
#[derive(Clone, Debug)]
pub(crate) struct AdmissibilityPath {
    pub b: Vec<f64>,
    pub running_min: Vec<f64>,
    pub tau_index: usize,
    pub hit: bool,
}

pub(crate) fn admissibility_path<R: Rng>(rng: &mut R, n_grid: usize) -> AdmissibilityPath {
    let h = 2.0 / n_grid as f64;
    let sd = h.sqrt();
    let cap = n_grid / 2;
    let u: f64 = rng.random_range(0.0..1.0);
    let (mut b, mut running_min) = (vec![0.0], vec![0.0]);
    let (mut x, mut m) = (0.0f64, 0.0f64);
    let mut tau_index = cap;
    let mut hit = false;
    for i in 1..=cap {
        let z: f64 = StandardNormal.sample(rng);
        x += sd * z;
        m = m.min(x);
        b.push(x);
        running_min.push(m);
        if m <= -u {
            tau_index = i;
            hit = true;
            break;
        }
    }
    b.resize(n_grid + 1, x);
    running_min.resize(n_grid + 1, m);
    AdmissibilityPath { b, running_min, tau_index, hit }
}

fn f_weight(x: f64) -> f64 {
    (1.0 - x).powf(-0.5) - 1.0
}

/// Analytic admissibility constant at quoted prices for truncation level `n`.
pub fn admissibility_constant(n: u32) -> f64 {
    let a = 1.0 - 1.0 / n as f64;
    (1.0 - (1.0 - a).sqrt() + f_weight(a)) / 2.0
}

#[derive(Clone, Copy, Debug)]
struct PathConstants {
    quoted: f64,
    actual: f64,
    terminal_bond: f64,
    hit: bool,
}

fn path_constants(p: &AdmissibilityPath, n: u32) -> PathConstants {
    let cap = 1.0 - 1.0 / n as f64;
    let tau = p.tau_index;
    let after = (3.0 + p.b[tau] + 2.0) / 2.0;
    let (mut bond, mut held) = (0.0f64, 0.0f64);
    let (mut quoted, mut actual) = (0.0f64, 0.0f64);
    for i in 1..=tau {
        let ask = 3.0 + p.b[i];
        let target = if i < tau { f_weight((-p.running_min[i]).min(cap)) } else { 0.0 };
        let d = target - held;
        bond -= if d >= 0.0 { d * ask } else { d * after };
        held = target;
        let (bid_q, bid_x) = if i < tau { (1.0, 2.0) } else { (after, after) };
        quoted = quoted.max(minimal_shift(&bond, &held, &bid_q, &ask));
        actual = actual.max(minimal_shift(&bond, &held, &bid_x, &ask));
    }
    PathConstants { quoted, actual, terminal_bond: bond, hit: p.hit }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub n: u32,
    pub grid: usize,
    pub scenarios: usize,
    pub seed: u64,
    /// Analytic constant at quoted prices.
    pub analytic_quoted: f64,
    /// Admissibility constant of the untruncated strategy at actual prices.
    pub analytic_limit: f64,
    /// Largest per-scenario minimal constant at quoted prices.
    pub quoted_constant: f64,
    /// Largest per-scenario minimal constant at actual prices.
    pub actual_constant: f64,
    pub quoted_relative_error: f64,
    /// Fraction of scenarios where τ < 1.
    pub hit_fraction: f64,
    pub terminal_bond: Summary,
}

const CHUNK: usize = 1000;

/// Monte Carlo run of the admissibility example with truncation level `n`;
/// scenario `k` uses random stream `k`.
pub fn admissibility_example_run(n: u32, n_scen: usize, n_grid: usize, seed: u64) -> Result<AdmissibilityReport, PathError> {
    if n < 1 || n_scen == 0 || n_grid < 2 || n_grid % 2 != 0 {
        return Err(PathError::BadParams("need n ≥ 1, scenarios > 0 and an even grid size".into()));
    }
    let per: Vec<PathConstants> = (0..n_scen as u64)
        .into_par_iter()
        .map(|k| path_constants(&admissibility_path(&mut instance_rng(seed, k), n_grid), n))
        .collect();
    let quoted_constant = per.iter().map(|c| c.quoted).fold(0.0, f64::max);
    let actual_constant = per.iter().map(|c| c.actual).fold(0.0, f64::max);
    let analytic_quoted = admissibility_constant(n);
    let bonds: Vec<f64> = per.iter().map(|c| c.terminal_bond).collect();
    Ok(AdmissibilityReport {
        n,
        grid: n_grid,
        scenarios: n_scen,
        seed,
        analytic_quoted,
        analytic_limit: 1.0,
        quoted_constant,
        actual_constant,
        quoted_relative_error: (quoted_constant - analytic_quoted).abs() / analytic_quoted,
        hit_fraction: per.iter().filter(|c| c.hit).count() as f64 / n_scen as f64,
        terminal_bond: Summary::of(&bonds),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LarssonReport {
    pub t1: f64,
    pub grid: usize,
    pub scenarios: usize,
    pub seed: u64,
    /// Largest actual bid strictly before `t1` over all scenarios.
    pub max_bid_before_jump: f64,
    /// Conditional lower bound of the actual bid at `t1` given the past.
    pub lower_envelope_at_jump: f64,
    pub fraction_positive: f64,
    pub mean: f64,
    pub std_error: f64,
    pub analytic_mean: f64,
    /// `(mean − analytic_mean) / std_error`.
    pub z_score: f64,
}

/// Statistics of the actual bid at `t1` over `n_scen` scenarios, streamed in
/// fixed chunks so the result does not depend on thread scheduling.
pub fn larsson_run(t1: f64, horizon: f64, n_grid: usize, n_scen: usize, seed: u64) -> Result<LarssonReport, PathError> {
    if !(t1 > 0.0 && t1 < horizon) || n_grid == 0 || n_scen == 0 {
        return Err(PathError::BadParams("need 0 < t1 < horizon, a positive grid and scenarios".into()));
    }
    let i1 = grid_index(t1, horizon, n_grid);
    let sd = (horizon / n_grid as f64).sqrt();
    let chunks: Vec<(f64, f64, usize)> = (0..n_scen.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let (mut s, mut s2, mut pos) = (0.0, 0.0, 0usize);
            for k in c * CHUNK..((c + 1) * CHUNK).min(n_scen) {
                let mut rng = instance_rng(seed, k as u64);
                let mut b = 0.0f64;
                for _ in 0..i1 {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    b += sd * z;
                }
                let x = b.abs();
                s += x;
                s2 += x * x;
                pos += usize::from(x > 0.0);
            }
            (s, s2, pos)
        })
        .collect();
    let (s, s2, pos) = chunks.iter().fold((0.0, 0.0, 0usize), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    let nf = n_scen as f64;
    let mean = s / nf;
    let var = if n_scen > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    let std_error = (var / nf).sqrt();
    let t_grid = i1 as f64 * horizon / n_grid as f64;
    let analytic_mean = (2.0 * t_grid / std::f64::consts::PI).sqrt();
    Ok(LarssonReport {
        t1,
        grid: n_grid,
        scenarios: n_scen,
        seed,
        max_bid_before_jump: 0.0,
        lower_envelope_at_jump: 0.0,
        fraction_positive: pos as f64 / nf,
        mean,
        std_error,
        analytic_mean,
        z_score: if std_error > 0.0 { (mean - analytic_mean) / std_error } else { 0.0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LarssonWitness {
    /// Predictable liquidation floor at `t1`: `M − φ`.
    pub floor: f64,
    /// Shifted liquidation value at `t1` at the realised actual bid.
    pub realised: f64,
}

/// Long `phi` shares bought at the ask 1 just before `t1` and valued at `t1`
/// with constant `m`. The floor is taken with `phi + m ≥ 0`, where only the
/// conditional lower bound 0 of the bid enters.
pub fn larsson_floor_witness(phi: f64, m: f64, bid_at_jump: f64) -> LarssonWitness {
    let bond = -phi;
    LarssonWitness {
        floor: shifted_liquidation(&bond, &phi, &m, &0.0, &1.0),
        realised: shifted_liquidation(&bond, &phi, &m, &bid_at_jump, &(bid_at_jump + 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_constants() {
        assert!((admissibility_constant(4) - 0.75).abs() < 1e-12);
        assert!((admissibility_constant(16) - 1.875).abs() < 1e-12);
        assert!(admissibility_constant(64) > admissibility_constant(16));
    }

    #[test]
    fn small_admissibility_run() {
        let r = admissibility_example_run(4, 500, 400, 1).unwrap();
        assert!(r.actual_constant <= 1.0 / 3.0 + 1e-9);
        assert!(r.quoted_constant <= r.analytic_quoted * 1.1);
        assert!(r.quoted_constant > r.analytic_quoted * 0.5);
        assert!(r.hit_fraction > 0.0 && r.hit_fraction < 1.0);
        assert_eq!(r, admissibility_example_run(4, 500, 400, 1).unwrap());
    }

    #[test]
    fn small_larsson_run() {
        let r = larsson_run(0.5, 1.0, 100, 2000, 3).unwrap();
        assert!(r.fraction_positive > 0.999);
        assert!(r.z_score.abs() < 4.0);
        assert_eq!(r, larsson_run(0.5, 1.0, 100, 2000, 3).unwrap());
    }

    #[test]
    fn larsson_floor_is_negative_while_realised_value_is_not() {
        let w = larsson_floor_witness(1.0, 0.5, 0.6);
        assert!(w.floor < 0.0);
        assert!(w.realised >= 0.0);
    }

    #[test]
    fn bad_params() {
        assert!(admissibility_example_run(4, 10, 9, 0).is_err());
        assert!(larsson_run(1.5, 1.0, 10, 10, 0).is_err());
    }
}
