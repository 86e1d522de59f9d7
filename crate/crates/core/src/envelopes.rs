//! Actual bid/ask price processes and predictable envelopes.

use crate::scalar::Scalar;
use crate::tree::{EventTree, MarketModel, NodeId, Role, TreeProcess};

/// Actual bid `x_bid`, actual ask `x_ask` and their difference.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopePair<S> {
    pub x_bid: TreeProcess<S>,
    pub x_ask: TreeProcess<S>,
    /// `x_ask - x_bid`; negative where the envelopes cross.
    pub spread: TreeProcess<S>,
}

impl<S: Scalar> EnvelopePair<S> {
    pub fn new(x_bid: TreeProcess<S>, x_ask: TreeProcess<S>) -> Self {
        let spread = TreeProcess::new(
            Role::Spread,
            x_bid.values.iter().zip(&x_ask.values).map(|(b, a)| a.clone() - b.clone()).collect(),
        );
        EnvelopePair { x_bid: x_bid.with_role(Role::EnvelopeBid), x_ask: x_ask.with_role(Role::EnvelopeAsk), spread }
    }

    /// The raw bid/ask processes used as execution prices.
    pub fn raw(model: &MarketModel<S>) -> Self {
        Self::new(model.bid.clone(), model.ask.clone())
    }

    /// Market whose bid and ask are these envelopes.
    pub fn as_market(&self, tree: &EventTree<S>) -> MarketModel<S> {
        MarketModel {
            tree: tree.clone(),
            bid: self.x_bid.clone().with_role(Role::Bid),
            ask: self.x_ask.clone().with_role(Role::Ask),
        }
    }

    pub fn is_crossed(&self, id: NodeId) -> bool {
        self.x_bid[id] > self.x_ask[id]
    }

    pub fn convert<T: Scalar>(&self) -> EnvelopePair<T> {
        EnvelopePair { x_bid: self.x_bid.convert(), x_ask: self.x_ask.convert(), spread: self.spread.convert() }
    }
}

/// Backward recursion: leaves keep (bid, ask); inner nodes take
/// `max(bid, min_c x_bid(c))` and `min(ask, max_c x_ask(c))`.
pub fn compute_envelopes<S: Scalar>(model: &MarketModel<S>) -> EnvelopePair<S> {
    let tree = &model.tree;
    let mut lo = model.bid.values.clone();
    let mut hi = model.ask.values.clone();
    for id in tree.ids().rev() {
        let ch = tree.children(id);
        if ch.is_empty() {
            continue;
        }
        let min_child = ch.iter().skip(1).fold(lo[ch[0].0].clone(), |m, c| m.min_of(lo[c.0].clone()));
        let max_child = ch.iter().skip(1).fold(hi[ch[0].0].clone(), |m, c| m.max_of(hi[c.0].clone()));
        lo[id.0] = lo[id.0].clone().max_of(min_child);
        hi[id.0] = hi[id.0].clone().min_of(max_child);
    }
    EnvelopePair::new(TreeProcess::new(Role::EnvelopeBid, lo), TreeProcess::new(Role::EnvelopeAsk, hi))
}

/// Nodes where the actual bid exceeds the actual ask.
pub fn envelope_crossing<S: Scalar>(env: &EnvelopePair<S>) -> Vec<NodeId> {
    (0..env.x_bid.len()).map(NodeId).filter(|&id| env.is_crossed(id)).collect()
}

/// Sibling-set minimum and maximum of `p`; both equal `p` at the root.
pub fn predictable_envelopes<S: Scalar>(tree: &EventTree<S>, p: &TreeProcess<S>) -> (TreeProcess<S>, TreeProcess<S>) {
    let mut lower = p.values.clone();
    let mut upper = p.values.clone();
    for id in tree.ids() {
        let ch = tree.children(id);
        if ch.is_empty() {
            continue;
        }
        let mn = ch.iter().skip(1).fold(p[ch[0]].clone(), |m, &c| m.min_of(p[c].clone()));
        let mx = ch.iter().skip(1).fold(p[ch[0]].clone(), |m, &c| m.max_of(p[c].clone()));
        for &c in ch {
            lower[c.0] = mn.clone();
            upper[c.0] = mx.clone();
        }
    }
    (TreeProcess::new(p.role, lower), TreeProcess::new(p.role, upper))
}

/// Minimum of `p` over the children of `id`.
pub fn min_over_children<S: Scalar>(tree: &EventTree<S>, p: &TreeProcess<S>, id: NodeId) -> Option<S> {
    let ch = tree.children(id);
    let first = p[*ch.first()?].clone();
    Some(ch.iter().skip(1).fold(first, |m, &c| m.min_of(p[c].clone())))
}
