//! Self-financing accounting under proportional transaction costs.
//!
//! Holdings are post-trade: `stock[n]` is the position after trading at node
//! `n`, and the trade at `n` is `stock[n] - stock[parent]` (the root trades
//! from zero). Purchases pay the ask side, sales receive the bid side of the
//! execution prices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envelopes::{predictable_envelopes, EnvelopePair};
use crate::scalar::Scalar;
use crate::tree::{EventTree, MarketModel, NodeId, Role, TreeProcess};

/// Which prices trades are executed at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    /// Actual bid/ask envelopes.
    #[default]
    Envelopes,
    /// Raw bid/ask quotes.
    Raw,
}

/// Execution price pair for the chosen mode.
pub fn execution_prices<S: Scalar>(model: &MarketModel<S>, env: &EnvelopePair<S>, exec: Execution) -> EnvelopePair<S> {
    match exec {
        Execution::Envelopes => env.clone(),
        Execution::Raw => EnvelopePair::raw(model),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("trade at node {label} where the execution bid exceeds the ask")]
    TradeAtCrossedNode { node: NodeId, label: String },
    #[error("strategy has {got} values for a tree with {expected} nodes")]
    ShapeMismatch { got: usize, expected: usize },
}

/// Stock holdings and the bond position they imply.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy<S> {
    pub stock: TreeProcess<S>,
    pub bond: TreeProcess<S>,
}

impl<S: Scalar> Strategy<S> {
    pub fn convert<T: Scalar>(&self) -> Strategy<T> {
        Strategy { stock: self.stock.convert(), bond: self.bond.convert() }
    }

    /// Multiplies every position by `c ≥ 0`; the ledger is positively homogeneous.
    pub fn scaled(&self, c: &S) -> Self {
        Strategy {
            stock: self.stock.map(Role::StrategyStock, |v| v.clone() * c.clone()),
            bond: self.bond.map(Role::StrategyBond, |v| v.clone() * c.clone()),
        }
    }
}

/// Fills in the bond account by self-financing along every path.
pub fn wealth_ledger<S: Scalar>(
    model: &MarketModel<S>,
    prices: &EnvelopePair<S>,
    stock: &TreeProcess<S>,
) -> Result<Strategy<S>, LedgerError> {
    bond_ledger(&model.tree, prices, stock)
}

pub fn bond_ledger<S: Scalar>(
    tree: &EventTree<S>,
    prices: &EnvelopePair<S>,
    stock: &TreeProcess<S>,
) -> Result<Strategy<S>, LedgerError> {
    if stock.len() != tree.len() {
        return Err(LedgerError::ShapeMismatch { got: stock.len(), expected: tree.len() });
    }
    let mut bond = vec![S::zero(); tree.len()];
    for id in tree.ids() {
        let (prev_bond, prev_stock) = match tree.parent(id) {
            Some(p) => (bond[p.0].clone(), stock[p].clone()),
            None => (S::zero(), S::zero()),
        };
        let delta = stock[id].clone() - prev_stock;
        if !delta.is_zero() && prices.is_crossed(id) {
            return Err(LedgerError::TradeAtCrossedNode { node: id, label: tree.label(id).to_string() });
        }
        bond[id.0] = prev_bond - delta.pos_part() * prices.x_ask[id].clone() + delta.neg_part() * prices.x_bid[id].clone();
    }
    Ok(Strategy {
        stock: stock.clone().with_role(Role::StrategyStock),
        bond: TreeProcess::new(Role::StrategyBond, bond),
    })
}

pub fn liquidation_value<S: Scalar>(bond: &S, stock: &S, bid: &S, ask: &S) -> S {
    bond.clone() + stock.pos_part() * bid.clone() - stock.neg_part() * ask.clone()
}

pub fn cost_value<S: Scalar>(bond: &S, stock: &S, bid: &S, ask: &S) -> S {
    bond.clone() + stock.pos_part() * ask.clone() - stock.neg_part() * bid.clone()
}

/// Liquidation value of the position shifted by `m` bonds and `m` shares.
pub fn shifted_liquidation<S: Scalar>(bond: &S, stock: &S, m: &S, bid: &S, ask: &S) -> S {
    liquidation_value(&(bond.clone() + m.clone()), &(stock.clone() + m.clone()), bid, ask)
}

/// Smallest `m ≥ 0` making the shifted liquidation value nonnegative.
///
/// `m ↦ shifted_liquidation` is increasing and piecewise linear with a kink at
/// `m = -stock`, so the root is found by checking the kink.
pub fn minimal_shift<S: Scalar>(bond: &S, stock: &S, bid: &S, ask: &S) -> S {
    let one = S::one();
    let at_zero = shifted_liquidation(bond, stock, &S::zero(), bid, ask);
    if at_zero >= S::zero() {
        return S::zero();
    }
    let root = if *stock >= S::zero() {
        -(bond.clone() + stock.clone() * bid.clone()) / (one + bid.clone())
    } else {
        // Value at the kink m = -stock is bond - stock.
        let kink = bond.clone() - stock.clone();
        if kink >= S::zero() {
            -(bond.clone() + stock.clone() * ask.clone()) / (one + ask.clone())
        } else {
            -(bond.clone() + stock.clone() * bid.clone()) / (one + bid.clone())
        }
    };
    root.max_of(S::zero())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortfolioReport<S> {
    pub v_liq: TreeProcess<S>,
    pub v_cost: TreeProcess<S>,
    pub pi: TreeProcess<S>,
    /// Running maximum of `v_cost` along each path.
    pub a_sup: TreeProcess<S>,
    /// Minimal admissibility constant.
    pub m_star: S,
}

pub fn portfolio_values<S: Scalar>(tree: &EventTree<S>, strategy: &Strategy<S>, prices: &EnvelopePair<S>) -> PortfolioReport<S> {
    let n = tree.len();
    let mut v_liq = Vec::with_capacity(n);
    let mut v_cost = Vec::with_capacity(n);
    let mut a_sup: Vec<S> = Vec::with_capacity(n);
    let mut m_star = S::zero();
    for id in tree.ids() {
        let (b, s) = (&strategy.bond[id], &strategy.stock[id]);
        let (lo, hi) = (&prices.x_bid[id], &prices.x_ask[id]);
        let c = cost_value(b, s, lo, hi);
        let run = match tree.parent(id) {
            Some(p) => a_sup[p.0].clone().max_of(c.clone()),
            None => c.clone(),
        };
        v_liq.push(liquidation_value(b, s, lo, hi));
        v_cost.push(c);
        a_sup.push(run);
        m_star = m_star.max_of(minimal_shift(b, s, lo, hi));
    }
    PortfolioReport {
        v_liq: TreeProcess::new(Role::Wealth, v_liq),
        v_cost: TreeProcess::new(Role::Wealth, v_cost),
        pi: strategy.bond.clone(),
        a_sup: TreeProcess::new(Role::Wealth, a_sup),
        m_star,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// First node (in id order) where the shifted liquidation value is negative.
    pub witness: Option<NodeId>,
}

pub fn is_admissible<S: Scalar>(tree: &EventTree<S>, strategy: &Strategy<S>, prices: &EnvelopePair<S>, m: &S) -> Admissibility {
    for id in tree.ids() {
        let v = shifted_liquidation(&strategy.bond[id], &strategy.stock[id], m, &prices.x_bid[id], &prices.x_ask[id]);
        if v.is_neg() {
            return Admissibility { admissible: false, witness: Some(id) };
        }
    }
    Admissibility { admissible: true, witness: None }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloorReport<S> {
    pub floor: TreeProcess<S>,
    pub passes: bool,
    pub witness: Option<NodeId>,
}

/// Liquidation value of the shifted pre-trade position at the sibling-set
/// worst prices: `bond(p) + M + (φ(p)+M)⁺·min_sib x_bid − (φ(p)+M)⁻·max_sib x_ask`
/// with `p` the parent; equal to `M` at the root.
pub fn predictable_liquidation_floor<S: Scalar>(
    tree: &EventTree<S>,
    strategy: &Strategy<S>,
    prices: &EnvelopePair<S>,
    m: &S,
) -> FloorReport<S> {
    let (lo, _) = predictable_envelopes(tree, &prices.x_bid);
    let (_, hi) = predictable_envelopes(tree, &prices.x_ask);
    let mut floor = Vec::with_capacity(tree.len());
    let mut witness = None;
    for id in tree.ids() {
        let v = match tree.parent(id) {
            Some(p) => shifted_liquidation(&strategy.bond[p], &strategy.stock[p], m, &lo[id], &hi[id]),
            None => m.clone(),
        };
        if witness.is_none() && v.is_neg() {
            witness = Some(id);
        }
        floor.push(v);
    }
    FloorReport { floor: TreeProcess::new(Role::Wealth, floor), passes: witness.is_none(), witness }
}

/// Smallest `M ≥ 0` for which the predictable liquidation floor is nonnegative.
pub fn minimal_floor_shift<S: Scalar>(tree: &EventTree<S>, strategy: &Strategy<S>, prices: &EnvelopePair<S>) -> S {
    let (lo, _) = predictable_envelopes(tree, &prices.x_bid);
    let (_, hi) = predictable_envelopes(tree, &prices.x_ask);
    let mut best = S::zero();
    for id in tree.ids() {
        if let Some(p) = tree.parent(id) {
            best = best.max_of(minimal_shift(&strategy.bond[p], &strategy.stock[p], &lo[id], &hi[id]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelopes::compute_envelopes;
    use crate::scalar::{rat, Rational};
    use crate::tree::{build_tree, TreeSpec};
    use num_traits::Zero;

    fn chain(bids: &[(i64, i64)], asks: &[(i64, i64)]) -> MarketModel<Rational> {
        let parents: Vec<Option<usize>> = (0..bids.len()).map(|i| if i == 0 { None } else { Some(i - 1) }).collect();
        let tree = EventTree::from_parents(&parents, &vec![rat(1, 1); bids.len()]).unwrap();
        MarketModel::from_fn(tree, |id| (rat(bids[id.0].0, bids[id.0].1), rat(asks[id.0].0, asks[id.0].1)))
    }

    #[test]
    fn zero_strategy() {
        let m = chain(&[(1, 1), (2, 1)], &[(3, 1), (2, 1)]);
        let env = compute_envelopes(&m);
        let s = wealth_ledger(&m, &env, &TreeProcess::zeros(&m.tree, Role::StrategyStock)).unwrap();
        assert!(s.bond.values.iter().all(Zero::is_zero));
        let rep = portfolio_values(&m.tree, &s, &env);
        assert!(rep.v_liq.values.iter().chain(&rep.v_cost.values).all(Zero::is_zero));
        assert!(rep.m_star.is_zero());
        assert!(is_admissible(&m.tree, &s, &env, &Rational::zero()).admissible);
        let fl = predictable_liquidation_floor(&m.tree, &s, &env, &Rational::zero());
        assert!(fl.passes);
        assert!(fl.floor.values.iter().all(Zero::is_zero));
    }

    #[test]
    fn buy_then_sell() {
        // x_ask(root) = 2, x_bid(leaf) = 3.
        let m = chain(&[(1, 1), (3, 1)], &[(2, 1), (3, 1)]);
        let prices = EnvelopePair::new(m.bid.clone(), m.ask.clone());
        let stock = TreeProcess::new(Role::StrategyStock, vec![rat(1, 1), rat(0, 1)]);
        let s = wealth_ledger(&m, &prices, &stock).unwrap();
        assert_eq!(s.bond.values, vec![rat(-2, 1), rat(1, 1)]);
    }

    #[test]
    fn counterexample_values() {
        // bid0 = ask0 = 1, bid1 = 1, ask1 = 2.
        let m = chain(&[(1, 1), (1, 1)], &[(1, 1), (2, 1)]);
        let env = compute_envelopes(&m);
        let stock = TreeProcess::new(Role::StrategyStock, vec![rat(1, 1), rat(1, 1)]);
        let s = wealth_ledger(&m, &env, &stock).unwrap();
        let rep = portfolio_values(&m.tree, &s, &env);
        assert_eq!(rep.v_liq[NodeId(1)], rat(0, 1));
        assert_eq!(rep.v_cost[NodeId(1)], rat(1, 1));
        assert_eq!(rep.a_sup[NodeId(1)], rat(1, 1));
    }

    #[test]
    fn admissibility_arithmetic() {
        // Buy 2 at ask 2, later worst bid 1.
        let m = chain(&[(2, 1), (1, 1)], &[(2, 1), (1, 1)]);
        let prices = EnvelopePair::new(m.bid.clone(), m.ask.clone());
        let stock = TreeProcess::new(Role::StrategyStock, vec![rat(2, 1), rat(2, 1)]);
        let s = wealth_ledger(&m, &prices, &stock).unwrap();
        assert!(is_admissible(&m.tree, &s, &prices, &rat(1, 1)).admissible);
        let no = is_admissible(&m.tree, &s, &prices, &rat(9, 10));
        assert!(!no.admissible);
        assert_eq!(no.witness, Some(NodeId(1)));
        assert_eq!(portfolio_values(&m.tree, &s, &prices).m_star, rat(1, 1));
    }

    #[test]
    fn trade_at_crossed_node_rejected() {
        let spec = TreeSpec::new(1).root("r").child("a", "r", rat(1, 2)).child("b", "r", rat(1, 2));
        let tree = build_tree(&spec).unwrap();
        let m = MarketModel::from_fn(tree.clone(), |id| {
            let v = [1, 2, 3][id.0];
            (rat(v, 1), rat(v, 1))
        });
        let env = compute_envelopes(&m);
        let stock = TreeProcess::new(Role::StrategyStock, vec![rat(1, 1), rat(1, 1), rat(1, 1)]);
        assert!(matches!(wealth_ledger(&m, &env, &stock), Err(LedgerError::TradeAtCrossedNode { .. })));
        let hold_later = TreeProcess::new(Role::StrategyStock, vec![rat(0, 1), rat(1, 1), rat(0, 1)]);
        assert!(wealth_ledger(&m, &env, &hold_later).is_ok());
    }

    #[test]
    fn minimal_shift_pieces() {
        // Long: bond -4, stock 2, bid 1: -4 + M + (2+M) = 0 at M = 1.
        assert_eq!(minimal_shift(&rat(-4, 1), &rat(2, 1), &rat(1, 1), &rat(2, 1)), rat(1, 1));
        // Short with kink value positive: bond 1, stock -3, ask 2:
        // g(M) = 1 + M - (3 - M)·2 = 0 at M = 5/3 ≤ 3.
        assert_eq!(minimal_shift(&rat(1, 1), &rat(-3, 1), &rat(1, 1), &rat(2, 1)), rat(5, 3));
        // Short with kink value negative: bond -5, stock -1, bid 1:
        // g(-stock) = -4 < 0, root on the long piece: -5 + M + (M-1) = 0 at M = 3.
        assert_eq!(minimal_shift(&rat(-5, 1), &rat(-1, 1), &rat(1, 1), &rat(2, 1)), rat(3, 1));
        for (b, s) in [(-4, 2), (1, -3), (-5, -1), (3, 1)] {
            let m = minimal_shift(&rat(b, 1), &rat(s, 1), &rat(1, 1), &rat(2, 1));
            let v = shifted_liquidation(&rat(b, 1), &rat(s, 1), &m, &rat(1, 1), &rat(2, 1));
            assert!(v >= Rational::zero());
            if m > Rational::zero() {
                assert!(v.is_zero());
            }
        }
    }
}
