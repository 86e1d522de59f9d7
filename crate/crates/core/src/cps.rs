//! Consistent price systems: construction by LP, re-validation, and the
//! frictionless round trip.

use serde::Serialize;
use thiserror::Error;

use crate::arbitrage::{check_na_nf, check_na_ps, max_position_lp, position_bound, ArbitrageError, ArbitrageVerdict, Extended};
use crate::envelopes::{compute_envelopes, EnvelopePair};
use crate::lp::{solve_with_fallback, Cmp, LinearProgram, LpError, LpOutcome};
use crate::scalar::Scalar;
use crate::tree::{EventTree, MarketModel, NodeId, Role, TreeProcess};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CpsError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Arbitrage(#[from] ArbitrageError),
}

/// Which price bounds the martingale must respect.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CpsBounds {
    /// Actual bid and ask.
    #[default]
    Envelopes,
    /// Quoted bid and ask.
    Raw,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CpsOptions {
    pub bounds: CpsBounds,
    /// Second stage maximizing the distance to the bounds at nodes with a positive spread.
    pub strict: bool,
}

/// Equivalent martingale measure and price process inside the bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct CpsCertificate<S> {
    /// Transition weights of Q (1 at the root).
    pub weights: TreeProcess<S>,
    pub price: TreeProcess<S>,
    /// Smallest terminal Q-probability and terminal price guaranteed by the LP.
    pub delta: S,
    /// Smallest `min(S − lower, upper − S)` over positive-spread nodes, in strict mode.
    pub strict_slack: Option<S>,
    pub bounds: CpsBounds,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CpsOutcome<S> {
    Found(CpsCertificate<S>),
    /// No equivalent martingale inside the bounds; `delta` is the LP optimum (zero, or absent if infeasible).
    NotFound { delta: Option<S> },
}

impl<S> CpsOutcome<S> {
    pub fn certificate(&self) -> Option<&CpsCertificate<S>> {
        match self {
            CpsOutcome::Found(c) => Some(c),
            CpsOutcome::NotFound { .. } => None,
        }
    }
}

struct CpsVars {
    m: usize,
    y: usize,
}

fn cps_program<S: Scalar>(tree: &EventTree<S>, lo: &TreeProcess<S>, hi: &TreeProcess<S>) -> (LinearProgram<S>, Vec<CpsVars>, usize) {
    let mut lp = LinearProgram::new(0);
    let vars: Vec<CpsVars> = tree.ids().map(|_| CpsVars { m: lp.add_var(), y: lp.add_var() }).collect();
    let delta = lp.add_var();
    lp.constrain(vec![(vars[0].m, S::one())], Cmp::Eq, S::one());
    for id in tree.ids() {
        let v = &vars[id.0];
        let ch = tree.children(id);
        if ch.is_empty() {
            lp.constrain(vec![(v.m, S::one()), (delta, -S::one())], Cmp::Ge, S::zero());
            lp.constrain(vec![(v.y, S::one()), (delta, -S::one())], Cmp::Ge, S::zero());
        } else {
            let mut mass = vec![(v.m, S::one())];
            let mut value = vec![(v.y, S::one())];
            for c in ch {
                mass.push((vars[c.0].m, -S::one()));
                value.push((vars[c.0].y, -S::one()));
            }
            lp.constrain(mass, Cmp::Eq, S::zero());
            lp.constrain(value, Cmp::Eq, S::zero());
        }
        lp.constrain(vec![(v.y, S::one()), (v.m, -lo[id].clone())], Cmp::Ge, S::zero());
        lp.constrain(vec![(v.y, S::one()), (v.m, -hi[id].clone())], Cmp::Le, S::zero());
    }
    lp.constrain(vec![(delta, S::one())], Cmp::Le, S::one());
    (lp, vars, delta)
}

fn recover<S: Scalar>(tree: &EventTree<S>, vars: &[CpsVars], x: &[S]) -> (TreeProcess<S>, TreeProcess<S>) {
    let weights = TreeProcess::from_fn(tree, Role::Density, |id| match tree.parent(id) {
        Some(p) => x[vars[id.0].m].clone() / x[vars[p.0].m].clone(),
        None => S::one(),
    });
    let price = TreeProcess::from_fn(tree, Role::Price, |id| x[vars[id.0].y].clone() / x[vars[id.0].m].clone());
    (weights, price)
}

/// Maximizes the smallest terminal mass of an equivalent martingale measure
/// whose martingale stays within the bounds; a positive optimum yields a CPS.
pub fn find_cps<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>, opts: CpsOptions) -> Result<CpsOutcome<S>, CpsError> {
    let tree = &model.tree;
    let (lo, hi) = match opts.bounds {
        CpsBounds::Envelopes => (&env.x_bid, &env.x_ask),
        CpsBounds::Raw => (&model.bid, &model.ask),
    };
    let (mut lp, vars, delta) = cps_program(tree, lo, hi);
    lp.set_objective(&[(delta, S::one())]);
    let sol = match solve_with_fallback(&lp)?.0 {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => return Ok(CpsOutcome::NotFound { delta: None }),
        LpOutcome::Unbounded => return Err(LpError::NumericalFailure("bounded CPS program reported unbounded".into()).into()),
    };
    if !sol.value.is_pos() {
        return Ok(CpsOutcome::NotFound { delta: Some(sol.value) });
    }
    let delta_star = sol.value.clone();
    let mut x = sol.x;
    let mut strict_slack = None;
    if opts.strict {
        // Keep half the mass margin and push the price away from both bounds.
        let s = lp.add_var();
        let two = S::from_i64(2);
        lp.constrain(vec![(delta, S::one())], Cmp::Ge, delta_star.clone() / two);
        lp.constrain(vec![(s, S::one())], Cmp::Le, S::one());
        for id in tree.ids() {
            if (hi[id].clone() - lo[id].clone()).is_pos() {
                let v = &vars[id.0];
                lp.constrain(vec![(v.y, S::one()), (v.m, -lo[id].clone()), (s, -S::one())], Cmp::Ge, S::zero());
                lp.constrain(vec![(v.y, S::one()), (v.m, -hi[id].clone()), (s, S::one())], Cmp::Le, S::zero());
            }
        }
        lp.set_objective(&[(s, S::one())]);
        if let LpOutcome::Optimal(sol2) = solve_with_fallback(&lp)?.0 {
            x = sol2.x;
        }
    }
    let (weights, price) = recover(tree, &vars, &x);
    if opts.strict {
        strict_slack = tree
            .ids()
            .filter(|&id| (hi[id].clone() - lo[id].clone()).is_pos())
            .map(|id| (price[id].clone() - lo[id].clone()).min_of(hi[id].clone() - price[id].clone()))
            .reduce(S::min_of)
            .or(Some(S::zero()));
    }
    let delta = tree.leaves().iter().map(|&l| x[vars[l.0].m].clone().min_of(x[vars[l.0].y].clone())).reduce(S::min_of).expect("leaves");
    Ok(CpsOutcome::Found(CpsCertificate { weights, price, delta, strict_slack, bounds: opts.bounds }))
}

/// Residuals of a certificate against the bounds and the martingale property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CpsResiduals<S> {
    pub martingale_residual: S,
    pub weight_sum_residual: S,
    pub min_weight: S,
    pub bound_violation: S,
    pub min_terminal_price: S,
    pub failures: Vec<String>,
    pub passes: bool,
}

/// Recomputes every defining property of a CPS from scratch.
pub fn verify_cps<S: Scalar>(tree: &EventTree<S>, cert: &CpsCertificate<S>, lo: &TreeProcess<S>, hi: &TreeProcess<S>) -> CpsResiduals<S> {
    let tol = S::tol();
    let mut mart = S::zero();
    let mut wsum = S::zero();
    let mut min_w: Option<S> = None;
    let mut bound = S::zero();
    for id in tree.ids() {
        let ch = tree.children(id);
        if !ch.is_empty() {
            let mut e = S::zero();
            let mut total = S::zero();
            for &c in ch {
                e = e + cert.weights[c].clone() * cert.price[c].clone();
                total = total + cert.weights[c].clone();
                min_w = Some(match min_w {
                    Some(w) => w.min_of(cert.weights[c].clone()),
                    None => cert.weights[c].clone(),
                });
            }
            mart = mart.max_of((e - cert.price[id].clone()).abs());
            wsum = wsum.max_of((total - S::one()).abs());
        }
        bound = bound
            .max_of(lo[id].clone() - cert.price[id].clone())
            .max_of(cert.price[id].clone() - hi[id].clone());
    }
    let min_weight = min_w.unwrap_or_else(S::one);
    let min_terminal_price = tree.leaves().iter().map(|&l| cert.price[l].clone()).reduce(S::min_of).expect("leaves");
    let mut failures = Vec::new();
    if !min_weight.is_pos() {
        failures.push("not equivalent".to_string());
    }
    if wsum > tol {
        failures.push("weights do not sum to one".to_string());
    }
    if mart > tol {
        failures.push("not a martingale".to_string());
    }
    if bound > tol {
        failures.push("outside bounds".to_string());
    }
    CpsResiduals {
        passes: failures.is_empty(),
        martingale_residual: mart,
        weight_sum_residual: wsum,
        min_weight,
        bound_violation: bound,
        min_terminal_price,
        failures,
    }
}

/// Outcome of re-checking the frictionless model `bid = ask = S`.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripReport<S> {
    pub na_nf: ArbitrageVerdict<S>,
    pub na_ps: ArbitrageVerdict<S>,
    /// Non-reversible nodes checked for a finite maximal 1-admissible position.
    pub non_reversible_nodes: usize,
    pub unbounded_positions: Vec<NodeId>,
    pub passes: bool,
}

/// Builds the frictionless model with price `S` under the original measure
/// and checks NA^nf, NA^ps, and finite maximal positions.
pub fn frictionless_roundtrip<S: Scalar>(tree: &EventTree<S>, cert: &CpsCertificate<S>) -> Result<RoundtripReport<S>, CpsError> {
    let model = MarketModel::frictionless(tree.clone(), &cert.price);
    let env = compute_envelopes(&model);
    let na_nf = check_na_nf(&model, &env)?;
    let na_ps = check_na_ps(&model, &env)?;
    let mut non_reversible_nodes = 0;
    let mut unbounded_positions = Vec::new();
    if na_nf.holds {
        for id in tree.ids().filter(|&id| !tree.is_leaf(id)) {
            if position_bound(&model, &env, id)? == Extended::PosInfinity {
                continue;
            }
            non_reversible_nodes += 1;
            if max_position_lp(&model, &env, id, &S::one())? == Extended::PosInfinity {
                unbounded_positions.push(id);
            }
        }
    }
    let passes = na_nf.holds && na_ps.holds && unbounded_positions.is_empty();
    Ok(RoundtripReport { na_nf, na_ps, non_reversible_nodes, unbounded_positions, passes })
}

/// Both sides of the finite duality on one model.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport<S> {
    pub na_nf: ArbitrageVerdict<S>,
    pub cps: CpsOutcome<S>,
    pub residuals: Option<CpsResiduals<S>>,
    /// NA^nf holds exactly when a CPS was found.
    pub consistent: bool,
}

pub fn duality_check<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>) -> Result<DualityReport<S>, CpsError> {
    let na_nf = check_na_nf(model, env)?;
    let cps = find_cps(model, env, CpsOptions::default())?;
    let residuals = cps.certificate().map(|c| verify_cps(&model.tree, c, &env.x_bid, &env.x_ask));
    let found = cps.certificate().is_some() && residuals.as_ref().map_or(false, |r| r.passes);
    Ok(DualityReport { consistent: na_nf.holds == found, na_nf, cps, residuals })
}
