//! Numéraire-free and prospective strict no-arbitrage checks, position
//! bounds, and an independent brute-force oracle.

use serde::Serialize;
use thiserror::Error;

use crate::envelopes::{envelope_crossing, min_over_children, EnvelopePair};
use crate::ledger::{cost_value, liquidation_value, wealth_ledger, Execution, LedgerError, Strategy};
use crate::lp::{solve_with_fallback, Cmp, LinearProgram, LpError, LpOutcome};
use crate::scalar::Scalar;
use crate::tree::{EventTree, MarketModel, NodeId, Role, TreeProcess};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    #[serde(rename = "NA_NF")]
    NaNf,
    #[serde(rename = "NA_PS")]
    NaPs,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArbitrageError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("node {0} is terminal")]
    TerminalNode(NodeId),
    #[error("envelopes cross at node {0}; the position LP is undefined")]
    CrossedEnvelopes(NodeId),
    #[error("oracle budget exceeded: {nodes} nodes > {budget}")]
    OracleBudgetExceeded { nodes: usize, budget: usize },
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
}

/// Node and time at which a prospective arbitrage shows up.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness<S> {
    pub time: usize,
    pub node: NodeId,
    pub label: String,
    pub v_liq: S,
    pub v_cost: S,
}

/// A concrete strategy violating the condition.
#[derive(Clone, Debug, PartialEq)]
pub struct ArbitrageCertificate<S> {
    pub strategy: Strategy<S>,
    pub execution: Execution,
    pub witness: Option<Witness<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArbitrageVerdict<S> {
    pub condition: Condition,
    pub holds: bool,
    /// Exact arithmetic decided the sign.
    pub certified: bool,
    /// LP optimum behind the verdict (absent when decided by an envelope crossing).
    pub optimum: Option<S>,
    pub crossing: Vec<NodeId>,
    pub certificate: Option<ArbitrageCertificate<S>>,
    /// A float LP failed and was re-solved in rationals.
    pub exact_retry: bool,
}

/// Slack used when re-validating float certificates.
fn cert_slack<S: Scalar>() -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::of_f64(1e-7).unwrap_or_else(|_| S::zero())
    }
}

/// Linear expressions for holdings built from per-node buy/sell variables.
#[derive(Clone)]
struct Position<S> {
    buy: usize,
    sell: usize,
    stock: Vec<(usize, S)>,
    bond: Vec<(usize, S)>,
}

/// Adds buy/sell variables for `nodes` (closed under parents within the
/// set, listed parents first) and returns the holding expressions.
fn trade_positions<S: Scalar>(
    lp: &mut LinearProgram<S>,
    tree: &EventTree<S>,
    prices: &EnvelopePair<S>,
    nodes: &[NodeId],
) -> Vec<Option<Position<S>>> {
    let mut pos: Vec<Option<Position<S>>> = vec![None; tree.len()];
    for &id in nodes {
        let buy = lp.add_var();
        let sell = lp.add_var();
        let (mut stock, mut bond) = match tree.parent(id).and_then(|p| pos[p.0].as_ref()) {
            Some(p) => (p.stock.clone(), p.bond.clone()),
            None => (Vec::new(), Vec::new()),
        };
        stock.push((buy, S::one()));
        stock.push((sell, -S::one()));
        bond.push((buy, -prices.x_ask[id].clone()));
        bond.push((sell, prices.x_bid[id].clone()));
        pos[id.0] = Some(Position { buy, sell, stock, bond });
    }
    pos
}

/// Holdings implied by an LP solution; nodes without variables inherit the
/// parent's holding (zero above the traded region).
fn holdings_from<S: Scalar>(tree: &EventTree<S>, pos: &[Option<Position<S>>], x: &[S]) -> TreeProcess<S> {
    let mut stock = vec![S::zero(); tree.len()];
    for id in tree.ids() {
        let base = tree.parent(id).map(|p| stock[p.0].clone()).unwrap_or_else(S::zero);
        let trade = pos[id.0]
            .as_ref()
            .map(|p| x[p.buy].clone() - x[p.sell].clone())
            .unwrap_or_else(S::zero);
        stock[id.0] = base + trade;
    }
    TreeProcess::new(Role::StrategyStock, stock)
}

fn scale_expr<S: Scalar>(e: &[(usize, S)], c: &S) -> Vec<(usize, S)> {
    e.iter().map(|(j, v)| (*j, v.clone() * c.clone())).collect()
}

/// Buy-and-sell round trip at the deepest crossing, executed at raw quotes.
///
/// At a deepest crossed node either the actual ask is the quoted ask (buy
/// there, sell where the bid first reaches the actual bid) or the actual bid
/// is the quoted bid (short there, cover where the ask first drops to the
/// actual ask).
pub fn crossing_certificate<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>) -> Option<ArbitrageCertificate<S>> {
    let tree = &model.tree;
    let crossed = envelope_crossing(env);
    let n = *crossed.iter().max_by_key(|id| (tree.time(**id), id.0))?;
    let long = env.x_ask[n] == model.ask[n];
    let short = env.x_bid[n] == model.bid[n];
    if !long && !short {
        return None;
    }
    let mut stock = TreeProcess::zeros(tree, Role::StrategyStock);
    let unit = if long { S::one() } else { -S::one() };
    // Depth-first over the subtree of n, closing at the first qualifying node.
    let mut stack: Vec<NodeId> = vec![n];
    while let Some(id) = stack.pop() {
        let closes = id != n
            && if long {
                model.bid[id] >= env.x_bid[n]
            } else {
                model.ask[id] <= env.x_ask[n]
            };
        if closes {
            continue;
        }
        stock.set(id, unit.clone());
        stack.extend(tree.children(id).iter().copied());
    }
    let raw = EnvelopePair::raw(model);
    let strategy = wealth_ledger(model, &raw, &stock).ok()?;
    Some(ArbitrageCertificate { strategy, execution: Execution::Raw, witness: None })
}

/// Terminal positions are componentwise nonnegative and some component is positive.
pub fn validate_nf_certificate<S: Scalar>(tree: &EventTree<S>, strategy: &Strategy<S>) -> Result<(), String> {
    let slack = cert_slack::<S>();
    let mut positive = false;
    for &l in tree.leaves() {
        let (b, s) = (&strategy.bond[l], &strategy.stock[l]);
        if *b < -slack.clone() || *s < -slack.clone() {
            return Err(format!("terminal position ({b}, {s}) at {} is negative", tree.label(l)));
        }
        if *b > slack || *s > slack {
            positive = true;
        }
    }
    if positive {
        Ok(())
    } else {
        Err("terminal position is zero everywhere".into())
    }
}

/// NA^nf: no strategy from zero ends with a nonnegative, nonzero (bond, stock).
pub fn check_na_nf<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>) -> Result<ArbitrageVerdict<S>, ArbitrageError> {
    let tree = &model.tree;
    let crossing = envelope_crossing(env);
    if !crossing.is_empty() {
        let certificate = crossing_certificate(model, env);
        if let Some(c) = &certificate {
            validate_nf_certificate(tree, &c.strategy).map_err(ArbitrageError::CertificateRejected)?;
        }
        return Ok(ArbitrageVerdict {
            condition: Condition::NaNf,
            holds: false,
            certified: S::EXACT,
            optimum: None,
            crossing,
            certificate,
            exact_retry: false,
        });
    }

    let mut lp = LinearProgram::new(0);
    let all: Vec<NodeId> = tree.ids().collect();
    let pos = trade_positions(&mut lp, tree, env, &all);
    let mut objective = Vec::new();
    for &l in tree.leaves() {
        let p = pos[l.0].as_ref().expect("leaf has variables");
        lp.constrain(p.bond.clone(), Cmp::Ge, S::zero());
        lp.constrain(p.stock.clone(), Cmp::Ge, S::zero());
        objective.extend(p.bond.iter().cloned());
        objective.extend(p.stock.iter().cloned());
    }
    lp.set_objective(&objective);
    lp.constrain(objective.clone(), Cmp::Le, S::one());
    let (out, exact_retry) = solve_with_fallback(&lp)?;
    let sol = match out {
        LpOutcome::Optimal(s) => s,
        other => return Err(LpError::NumericalFailure(format!("bounded feasible LP reported {other:?}")).into()),
    };
    if !sol.value.is_pos() {
        return Ok(ArbitrageVerdict {
            condition: Condition::NaNf,
            holds: true,
            certified: S::EXACT || exact_retry,
            optimum: Some(sol.value),
            crossing,
            certificate: None,
            exact_retry,
        });
    }
    let stock = holdings_from(tree, &pos, &sol.x);
    let strategy = wealth_ledger(model, env, &stock)?;
    validate_nf_certificate(tree, &strategy).map_err(ArbitrageError::CertificateRejected)?;
    Ok(ArbitrageVerdict {
        condition: Condition::NaNf,
        holds: false,
        certified: S::EXACT || exact_retry,
        optimum: Some(sol.value),
        crossing,
        certificate: Some(ArbitrageCertificate { strategy, execution: Execution::Envelopes, witness: None }),
        exact_retry,
    })
}

/// Discrete NA^ps: a position with nonnegative liquidation value at every
/// time-t node must have zero cost value there.
///
/// One LP per date t over strategies trading only up to t. With split
/// variables `stock = lq - lb`, the program maximizes
/// `Σ_w bond + lq·x_ask - lb·x_bid` subject to `bond + lq·x_bid - lb·x_ask ≥ 0`;
/// a positive optimum always exhibits either a positive liquidation value or
/// a positive cost value at some time-t node.
pub fn check_na_ps<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>) -> Result<ArbitrageVerdict<S>, ArbitrageError> {
    let tree = &model.tree;
    let crossing = envelope_crossing(env);
    if !crossing.is_empty() {
        let nf = check_na_nf(model, env)?;
        let certificate = nf.certificate.map(|mut c| {
            let raw = EnvelopePair::raw(model);
            c.witness = best_witness(tree, &c.strategy, &raw, tree.horizon());
            c
        });
        return Ok(ArbitrageVerdict { condition: Condition::NaPs, optimum: None, certificate, crossing, ..nf });
    }

    let mut any_retry = false;
    let mut last_value = S::zero();
    for t in 0..=tree.horizon() {
        let nodes: Vec<NodeId> = tree.ids().filter(|&id| tree.time(id) <= t).collect();
        let mut lp = LinearProgram::new(0);
        let pos = trade_positions(&mut lp, tree, env, &nodes);
        let mut objective = Vec::new();
        for &w in tree.level(t) {
            let p = pos[w.0].as_ref().expect("time-t node has variables");
            let lq = lp.add_var();
            let lb = lp.add_var();
            let mut split = p.stock.clone();
            split.push((lq, -S::one()));
            split.push((lb, S::one()));
            lp.constrain(split, Cmp::Eq, S::zero());
            let mut liq = p.bond.clone();
            liq.push((lq, env.x_bid[w].clone()));
            liq.push((lb, -env.x_ask[w].clone()));
            lp.constrain(liq, Cmp::Ge, S::zero());
            objective.extend(p.bond.iter().cloned());
            objective.push((lq, env.x_ask[w].clone()));
            objective.push((lb, -env.x_bid[w].clone()));
        }
        lp.set_objective(&objective);
        lp.constrain(objective.clone(), Cmp::Le, S::one());
        let (out, retry) = solve_with_fallback(&lp)?;
        any_retry |= retry;
        let sol = match out {
            LpOutcome::Optimal(s) => s,
            other => return Err(LpError::NumericalFailure(format!("bounded feasible LP reported {other:?}")).into()),
        };
        if !sol.value.is_pos() {
            last_value = last_value.max_of(sol.value);
            continue;
        }
        let stock = holdings_from(tree, &pos, &sol.x);
        let strategy = wealth_ledger(model, env, &stock)?;
        let witness = best_witness(tree, &strategy, env, t)
            .ok_or_else(|| ArbitrageError::CertificateRejected(format!("no positive cost value at time {t}")))?;
        // Normalize so that the witness cost value is one.
        let c = S::one() / witness.v_cost.clone();
        let strategy = strategy.scaled(&c);
        let witness = best_witness(tree, &strategy, env, t).expect("scaling keeps the witness");
        validate_ps_certificate(tree, &strategy, env, t).map_err(ArbitrageError::CertificateRejected)?;
        return Ok(ArbitrageVerdict {
            condition: Condition::NaPs,
            holds: false,
            certified: S::EXACT || retry,
            optimum: Some(sol.value),
            crossing,
            certificate: Some(ArbitrageCertificate { strategy, execution: Execution::Envelopes, witness: Some(witness) }),
            exact_retry: any_retry,
        });
    }
    Ok(ArbitrageVerdict {
        condition: Condition::NaPs,
        holds: true,
        certified: S::EXACT || any_retry,
        optimum: Some(last_value),
        crossing,
        certificate: None,
        exact_retry: any_retry,
    })
}

/// Time-t node with the largest cost value, if that value is positive.
fn best_witness<S: Scalar>(tree: &EventTree<S>, strategy: &Strategy<S>, prices: &EnvelopePair<S>, t: usize) -> Option<Witness<S>> {
    let mut best: Option<Witness<S>> = None;
    for &w in tree.level(t) {
        let (b, s) = (&strategy.bond[w], &strategy.stock[w]);
        let v_cost = cost_value(b, s, &prices.x_bid[w], &prices.x_ask[w]);
        let v_liq = liquidation_value(b, s, &prices.x_bid[w], &prices.x_ask[w]);
        if best.as_ref().map_or(true, |bw| v_cost > bw.v_cost) {
            best = Some(Witness { time: t, node: w, label: tree.label(w).to_string(), v_liq, v_cost });
        }
    }
    best.filter(|w| w.v_cost.is_pos())
}

/// Liquidation values at time t are nonnegative and some cost value is positive.
pub fn validate_ps_certificate<S: Scalar>(
    tree: &EventTree<S>,
    strategy: &Strategy<S>,
    prices: &EnvelopePair<S>,
    t: usize,
) -> Result<(), String> {
    let slack = cert_slack::<S>();
    let mut positive = false;
    for &w in tree.level(t) {
        let (b, s) = (&strategy.bond[w], &strategy.stock[w]);
        let liq = liquidation_value(b, s, &prices.x_bid[w], &prices.x_ask[w]);
        if liq < -slack.clone() {
            return Err(format!("liquidation value {liq} at {} is negative", tree.label(w)));
        }
        if cost_value(b, s, &prices.x_bid[w], &prices.x_ask[w]) > slack {
            positive = true;
        }
    }
    if positive {
        Ok(())
    } else {
        Err(format!("no positive cost value at time {t}"))
    }
}

/// A real number or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Extended<S> {
    Finite(S),
    PosInfinity,
}

impl<S: Scalar> Extended<S> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }
    pub fn finite(&self) -> Option<&S> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }
    /// `self ≤ other` in the extended order.
    pub fn le(&self, other: &Self) -> bool {
        match (self, other) {
            (_, Extended::PosInfinity) => true,
            (Extended::PosInfinity, Extended::Finite(_)) => false,
            (Extended::Finite(a), Extended::Finite(b)) => !(a.clone() - b.clone()).is_pos(),
        }
    }
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Extended::Finite(v) => v.to_json(),
            Extended::PosInfinity => serde_json::Value::String("+inf".into()),
        }
    }
}

/// `(1+e)/(x_ask − e)` with `e` the smallest child actual bid, or `+∞` when
/// a purchase is reversible (`x_ask ≤ e`).
pub fn position_bound<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>, node: NodeId) -> Result<Extended<S>, ArbitrageError> {
    let e = min_over_children(&model.tree, &env.x_bid, node).ok_or(ArbitrageError::TerminalNode(node))?;
    let gap = env.x_ask[node].clone() - e.clone();
    if gap.is_pos() {
        Ok(Extended::Finite((S::one() + e) / gap))
    } else {
        Ok(Extended::PosInfinity)
    }
}

/// Largest holding that can be built at `node`, starting flat there, by an
/// M-admissible strategy on the subtree of `node`.
pub fn max_position_lp<S: Scalar>(
    model: &MarketModel<S>,
    env: &EnvelopePair<S>,
    node: NodeId,
    m: &S,
) -> Result<Extended<S>, ArbitrageError> {
    let tree = &model.tree;
    if tree.is_leaf(node) {
        return Err(ArbitrageError::TerminalNode(node));
    }
    let nodes = tree.subtree(node);
    if let Some(&c) = nodes.iter().find(|&&id| env.is_crossed(id)) {
        return Err(ArbitrageError::CrossedEnvelopes(c));
    }
    let mut lp = LinearProgram::new(0);
    let pos = trade_positions(&mut lp, tree, env, &nodes);
    for &id in &nodes {
        let p = pos[id.0].as_ref().expect("subtree node has variables");
        // stock + M = up - dn; bond + M + up·x_bid - dn·x_ask ≥ 0.
        let up = lp.add_var();
        let dn = lp.add_var();
        let mut split = p.stock.clone();
        split.push((up, -S::one()));
        split.push((dn, S::one()));
        lp.constrain(split, Cmp::Eq, -m.clone());
        let mut liq = p.bond.clone();
        liq.push((up, env.x_bid[id].clone()));
        liq.push((dn, -env.x_ask[id].clone()));
        lp.constrain(liq, Cmp::Ge, -m.clone());
    }
    let root = pos[node.0].as_ref().expect("node has variables");
    lp.set_objective(&scale_expr(&root.stock, &S::one()));
    let (out, _) = solve_with_fallback(&lp)?;
    match out {
        LpOutcome::Optimal(s) => Ok(Extended::Finite(s.value)),
        LpOutcome::Unbounded => Ok(Extended::PosInfinity),
        LpOutcome::Infeasible => Err(LpError::NumericalFailure("zero strategy infeasible".into()).into()),
    }
}

/// Interval with open or closed ends.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceInterval<S> {
    pub lo: S,
    pub lo_closed: bool,
    pub hi: S,
    pub hi_closed: bool,
}

impl<S: Scalar> PriceInterval<S> {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo.clone(), self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo.clone(), other.lo_closed)
        } else {
            (self.lo.clone(), self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi.clone(), self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi.clone(), other.hi_closed)
        } else {
            (self.hi.clone(), self.hi_closed && other.hi_closed)
        };
        PriceInterval { lo, lo_closed, hi, hi_closed }
    }
}

/// Result of the brute-force search.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleVerdict<S> {
    pub holds: bool,
    /// Set of prices a consistent price system can take at the root.
    pub root_interval: Option<PriceInterval<S>>,
    /// A verified arbitrage, when the single-unit round-trip search finds one.
    pub certificate: Option<ArbitrageCertificate<S>>,
}

/// Reference decision for NA^nf on small trees, independent of the LP code.
///
/// The verdict comes from exact interval propagation: the set of values a
/// martingale with full-support weights and strictly positive terminal values
/// can take at a node, within the node's envelope interval, is an interval
/// computed leaf-to-root. When that set is empty somewhere, a search over
/// single-unit round trips (open at one node, close on every path) supplies a
/// concrete arbitrage whenever one of that shape exists.
pub fn brute_force_arbitrage<S: Scalar>(
    model: &MarketModel<S>,
    env: &EnvelopePair<S>,
    budget: usize,
) -> Result<OracleVerdict<S>, ArbitrageError> {
    let tree = &model.tree;
    if tree.len() > budget {
        return Err(ArbitrageError::OracleBudgetExceeded { nodes: tree.len(), budget });
    }
    let mut iv: Vec<Option<PriceInterval<S>>> = vec![None; tree.len()];
    for id in tree.ids().rev() {
        let own = PriceInterval { lo: env.x_bid[id].clone(), lo_closed: true, hi: env.x_ask[id].clone(), hi_closed: true };
        let ch = tree.children(id);
        let combined = if ch.is_empty() {
            let positive = PriceInterval { lo: S::zero(), lo_closed: false, hi: env.x_ask[id].clone(), hi_closed: true };
            Some(own.intersect(&positive))
        } else {
            let kids: Option<Vec<&PriceInterval<S>>> = ch.iter().map(|c| iv[c.0].as_ref()).collect();
            kids.map(|kids| {
                let lo = kids.iter().map(|k| k.lo.clone()).reduce(S::min_of).expect("children");
                let hi = kids.iter().map(|k| k.hi.clone()).reduce(S::max_of).expect("children");
                let lo_closed = kids.iter().all(|k| k.lo == lo && k.lo_closed);
                let hi_closed = kids.iter().all(|k| k.hi == hi && k.hi_closed);
                own.intersect(&PriceInterval { lo, lo_closed, hi, hi_closed })
            })
        };
        iv[id.0] = combined.filter(|i| !i.is_empty());
    }
    let root_interval = iv[0].clone();
    if root_interval.is_some() {
        return Ok(OracleVerdict { holds: true, root_interval, certificate: None });
    }
    let certificate = if envelope_crossing(env).is_empty() {
        round_trip_search(model, env)
    } else {
        crossing_certificate(model, env)
    };
    let certificate = certificate.filter(|c| validate_nf_certificate(tree, &c.strategy).is_ok());
    Ok(OracleVerdict { holds: false, root_interval: None, certificate })
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Infeasible,
    Zero,
    Positive,
}

/// Tries every node and direction for a one-unit round trip at envelope prices.
fn round_trip_search<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>) -> Option<ArbitrageCertificate<S>> {
    let tree = &model.tree;
    for n in tree.ids() {
        for long in [true, false] {
            if tree.is_leaf(n) {
                continue;
            }
            let price = if long { env.x_ask[n].clone() } else { env.x_bid[n].clone() };
            let mut status = vec![Status::Infeasible; tree.len()];
            let mut close = vec![false; tree.len()];
            for id in tree.subtree(n).into_iter().rev() {
                if id == n {
                    continue;
                }
                let gain = if long {
                    env.x_bid[id].clone() - price.clone()
                } else {
                    price.clone() - env.x_ask[id].clone()
                };
                let sell = if gain.is_pos() {
                    Status::Positive
                } else if gain.is_neg() {
                    Status::Infeasible
                } else {
                    Status::Zero
                };
                let hold = if tree.is_leaf(id) {
                    // Terminal (−price, 1) for a long position; a short one ends with −1 shares.
                    if long && price.approx_zero() {
                        Status::Positive
                    } else {
                        Status::Infeasible
                    }
                } else {
                    combine(tree.children(id).iter().map(|c| status[c.0]))
                };
                if sell >= hold {
                    status[id.0] = sell;
                    close[id.0] = true;
                } else {
                    status[id.0] = hold;
                }
            }
            if combine(tree.children(n).iter().map(|c| status[c.0])) != Status::Positive {
                continue;
            }
            let unit = if long { S::one() } else { -S::one() };
            let mut stock = TreeProcess::zeros(tree, Role::StrategyStock);
            let mut stack = vec![n];
            while let Some(id) = stack.pop() {
                if id != n && close[id.0] {
                    continue;
                }
                stock.set(id, unit.clone());
                stack.extend(tree.children(id).iter().copied());
            }
            if let Ok(strategy) = wealth_ledger(model, env, &stock) {
                return Some(ArbitrageCertificate { strategy, execution: Execution::Envelopes, witness: None });
            }
        }
    }
    None
}

fn combine(it: impl Iterator<Item = Status>) -> Status {
    let mut out = Status::Zero;
    for s in it {
        match s {
            Status::Infeasible => return Status::Infeasible,
            Status::Positive => out = Status::Positive,
            Status::Zero => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelopes::compute_envelopes;
    use crate::scalar::{rat, Rational};
    use crate::tree::{build_tree, TreeSpec};

    fn one_period(root: (i64, i64), kids: &[((i64, i64), (i64, i64))]) -> MarketModel<Rational> {
        let mut spec = TreeSpec::new(1).root("r");
        for (i, _) in kids.iter().enumerate() {
            spec = spec.child(&format!("c{i}"), "r", rat(1, kids.len() as i64));
        }
        let tree = build_tree(&spec).unwrap();
        MarketModel::from_fn(tree, |id| {
            if id.0 == 0 {
                (rat(root.0, 1), rat(root.1, 1))
            } else {
                let ((a, b), (c, d)) = kids[id.0 - 1];
                (rat(a, b), rat(c, d))
            }
        })
    }

    fn frictionless(root: i64, kids: &[i64]) -> MarketModel<Rational> {
        let k: Vec<_> = kids.iter().map(|&v| ((v, 1), (v, 1))).collect();
        one_period((root, root), &k)
    }

    #[test]
    fn martingale_binomial_holds() {
        let m = frictionless(2, &[1, 3]);
        let env = compute_envelopes(&m);
        let v = check_na_nf(&m, &env).unwrap();
        assert!(v.holds && v.certified);
        assert!(check_na_ps(&m, &env).unwrap().holds);
        let o = brute_force_arbitrage(&m, &env, 40).unwrap();
        assert!(o.holds);
    }

    #[test]
    fn up_only_is_arbitrage() {
        let m = frictionless(1, &[2, 3]);
        let env = compute_envelopes(&m);
        let v = check_na_nf(&m, &env).unwrap();
        assert!(!v.holds);
        let c = v.certificate.unwrap();
        assert_eq!(c.execution, Execution::Raw);
        assert_eq!(c.strategy.stock[NodeId(0)], rat(1, 1));
        validate_nf_certificate(&m.tree, &c.strategy).unwrap();
        let o = brute_force_arbitrage(&m, &env, 40).unwrap();
        assert!(!o.holds);
        assert!(o.certificate.is_some());
    }

    #[test]
    fn spread_model_holds() {
        let m = one_period((1, 2), &[((3, 2), (3, 2)), ((1, 2), (1, 2))]);
        let env = compute_envelopes(&m);
        assert!(check_na_nf(&m, &env).unwrap().holds);
        assert!(brute_force_arbitrage(&m, &env, 40).unwrap().holds);
    }

    #[test]
    fn ps_counterexample() {
        let m = one_period((1, 1), &[((1, 1), (2, 1))]);
        let env = compute_envelopes(&m);
        assert!(check_na_nf(&m, &env).unwrap().holds);
        let v = check_na_ps(&m, &env).unwrap();
        assert!(!v.holds);
        let w = v.certificate.unwrap().witness.unwrap();
        assert_eq!(w.time, 1);
        assert_eq!(w.v_cost, rat(1, 1));
        assert_eq!(w.v_liq, rat(0, 1));
    }

    #[test]
    fn bounds_one_period() {
        let m = one_period((2, 2), &[((1, 1), (1, 1)), ((3, 1), (3, 1))]);
        let env = compute_envelopes(&m);
        let b = position_bound(&m, &env, NodeId(0)).unwrap();
        assert_eq!(b, Extended::Finite(rat(2, 1)));
        assert_eq!(max_position_lp(&m, &env, NodeId(0), &rat(1, 1)).unwrap(), Extended::Finite(rat(2, 1)));
        assert_eq!(max_position_lp(&m, &env, NodeId(0), &rat(0, 1)).unwrap(), Extended::Finite(rat(0, 1)));

        let m3 = one_period((3, 3), &[((1, 1), (1, 1)), ((4, 1), (4, 1))]);
        let env3 = compute_envelopes(&m3);
        assert_eq!(position_bound(&m3, &env3, NodeId(0)).unwrap(), Extended::Finite(rat(1, 1)));

        let rev = one_period((1, 1), &[((1, 1), (1, 1)), ((1, 1), (1, 1))]);
        let env_r = compute_envelopes(&rev);
        assert_eq!(position_bound(&rev, &env_r, NodeId(0)).unwrap(), Extended::PosInfinity);
        assert_eq!(max_position_lp(&rev, &env_r, NodeId(0), &rat(1, 1)).unwrap(), Extended::PosInfinity);
        assert!(matches!(position_bound(&rev, &env_r, NodeId(1)), Err(ArbitrageError::TerminalNode(_))));
    }

    #[test]
    fn oracle_budget() {
        let tree: EventTree<Rational> = EventTree::uniform(&[3, 3, 3, 3]);
        let m = MarketModel::from_fn(tree, |_| (rat(1, 1), rat(1, 1)));
        let env = compute_envelopes(&m);
        assert!(matches!(brute_force_arbitrage(&m, &env, 40), Err(ArbitrageError::OracleBudgetExceeded { .. })));
    }

    #[test]
    fn oracle_round_trip_without_crossing() {
        // Uncrossed envelopes, but the root price sits at the bottom of the children's range.
        let m = one_period((1, 1), &[((1, 1), (1, 1)), ((2, 1), (2, 1))]);
        assert!(envelope_crossing(&compute_envelopes(&m)).is_empty());
        let env = compute_envelopes(&m);
        let v = check_na_nf(&m, &env).unwrap();
        assert!(!v.holds);
        let o = brute_force_arbitrage(&m, &env, 40).unwrap();
        assert!(!o.holds);
        let c = o.certificate.unwrap();
        assert_eq!(c.execution, Execution::Envelopes);
    }

    #[test]
    fn float_kernel_agrees() {
        let m = one_period((1, 2), &[((3, 2), (3, 2)), ((1, 2), (1, 2))]).convert::<f64>();
        let env = compute_envelopes(&m);
        let v = check_na_nf(&m, &env).unwrap();
        assert!(v.holds && !v.certified);
    }
}
