//! Path-enumeration reference implementations used to cross-check the
//! recursive algorithms. Exponential in the horizon; intended for small trees.

use crate::envelopes::EnvelopePair;
use crate::scalar::Scalar;
use crate::tree::{EventTree, MarketModel, NodeId, Role, TreeProcess};

/// All node sequences from `from` down to a leaf.
pub fn paths_from<S: Scalar>(tree: &EventTree<S>, from: NodeId) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![from]];
    while let Some(path) = stack.pop() {
        let last = *path.last().expect("non-empty path");
        let ch = tree.children(last);
        if ch.is_empty() {
            out.push(path);
        } else {
            for &c in ch.iter().rev() {
                let mut p = path.clone();
                p.push(c);
                stack.push(p);
            }
        }
    }
    out
}

/// `x_bid(n)` = min over paths from n of the largest bid on the path;
/// `x_ask(n)` = max over paths from n of the smallest ask on the path.
pub fn oracle_envelopes<S: Scalar>(model: &MarketModel<S>) -> EnvelopePair<S> {
    let tree = &model.tree;
    let mut lo = Vec::with_capacity(tree.len());
    let mut hi = Vec::with_capacity(tree.len());
    for id in tree.ids() {
        let mut best_lo: Option<S> = None;
        let mut best_hi: Option<S> = None;
        for path in paths_from(tree, id) {
            let max_bid = path.iter().map(|&n| model.bid[n].clone()).reduce(S::max_of).expect("path");
            let min_ask = path.iter().map(|&n| model.ask[n].clone()).reduce(S::min_of).expect("path");
            best_lo = Some(match best_lo {
                Some(v) => v.min_of(max_bid),
                None => max_bid,
            });
            best_hi = Some(match best_hi {
                Some(v) => v.max_of(min_ask),
                None => min_ask,
            });
        }
        lo.push(best_lo.expect("at least one path"));
        hi.push(best_hi.expect("at least one path"));
    }
    EnvelopePair::new(TreeProcess::new(Role::EnvelopeBid, lo), TreeProcess::new(Role::EnvelopeAsk, hi))
}
