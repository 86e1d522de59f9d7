//! Finite event trees, adapted processes and bid-ask market models.

use std::collections::HashMap;
use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Index of a node inside its tree. Nodes are stored level by level, so
/// iterating ids in reverse visits children before parents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Node<S> {
    pub label: String,
    pub time: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Transition probability from the parent (one at the root).
    pub weight: S,
    /// Product of transition weights from the root.
    pub prob: S,
}

/// Every variant is a malformed tree description.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("malformed spec: no root node (a node without parent at time 0)")]
    MissingRoot,
    #[error("malformed spec: more than one root ({0}, {1})")]
    MultipleRoots(String, String),
    #[error("malformed spec: duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("malformed spec: node `{node}` refers to unknown parent `{parent}`")]
    UnknownParent { node: String, parent: String },
    #[error("malformed spec: node `{node}` at time {time} but its parent is at time {parent_time}")]
    TimeGap { node: String, time: usize, parent_time: usize },
    #[error("malformed spec: root `{0}` must have time 0")]
    RootTime(String),
    #[error("malformed spec: node `{node}` has time {time} beyond horizon {horizon}")]
    BeyondHorizon { node: String, time: usize, horizon: usize },
    #[error("malformed spec: weight of node `{0}` must lie in (0, 1]")]
    BadWeight(String),
    #[error("malformed spec: transition weights out of `{node}` sum to {sum}, not 1")]
    WeightSum { node: String, sum: String },
    #[error("malformed spec: children of `{0}` mix explicit and missing weights")]
    PartialWeights(String),
    #[error("malformed spec: leaf `{node}` at time {time} before horizon {horizon}")]
    NonTerminalLeaf { node: String, time: usize, horizon: usize },
    #[error("malformed spec: node `{0}` is unreachable from the root")]
    Unreachable(String),
}

/// One node of a tree description.
#[derive(Clone, Debug)]
pub struct NodeSpec<S> {
    pub id: String,
    pub parent: Option<String>,
    pub time: usize,
    /// Transition weight from the parent; if every sibling omits it the
    /// weights default to uniform.
    pub weight: Option<S>,
}

#[derive(Clone, Debug)]
pub struct TreeSpec<S> {
    pub horizon: usize,
    pub nodes: Vec<NodeSpec<S>>,
}

impl<S: Scalar> TreeSpec<S> {
    pub fn new(horizon: usize) -> Self {
        TreeSpec { horizon, nodes: Vec::new() }
    }

    pub fn root(mut self, id: &str) -> Self {
        self.nodes.push(NodeSpec { id: id.into(), parent: None, time: 0, weight: None });
        self
    }

    /// Adds a child one period after its parent.
    pub fn child(mut self, id: &str, parent: &str, weight: S) -> Self {
        let time = self
            .nodes
            .iter()
            .find(|n| n.id == parent)
            .map(|n| n.time + 1)
            .unwrap_or(usize::MAX);
        self.nodes.push(NodeSpec {
            id: id.into(),
            parent: Some(parent.into()),
            time,
            weight: Some(weight),
        });
        self
    }
}

/// Finite filtered probability space as a rooted tree.
#[derive(Clone, Debug)]
pub struct EventTree<S> {
    nodes: Vec<Node<S>>,
    horizon: usize,
    levels: Vec<Vec<NodeId>>,
}

/// Validates a tree description and renumbers nodes level by level.
pub fn build_tree<S: Scalar>(spec: &TreeSpec<S>) -> Result<EventTree<S>, TreeError> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in spec.nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), i).is_some() {
            return Err(TreeError::DuplicateId(n.id.clone()));
        }
    }
    let mut root = None;
    for n in &spec.nodes {
        if n.parent.is_none() {
            if let Some(r) = root {
                let first: &NodeSpec<S> = &spec.nodes[r];
                return Err(TreeError::MultipleRoots(first.id.clone(), n.id.clone()));
            }
            if n.time != 0 {
                return Err(TreeError::RootTime(n.id.clone()));
            }
            root = index.get(n.id.as_str()).copied();
        }
    }
    let root = root.ok_or(TreeError::MissingRoot)?;

    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); spec.nodes.len()];
    for (i, n) in spec.nodes.iter().enumerate() {
        if n.time > spec.horizon {
            return Err(TreeError::BeyondHorizon { node: n.id.clone(), time: n.time, horizon: spec.horizon });
        }
        if let Some(p) = &n.parent {
            let pi = *index
                .get(p.as_str())
                .ok_or_else(|| TreeError::UnknownParent { node: n.id.clone(), parent: p.clone() })?;
            let pt = spec.nodes[pi].time;
            if n.time != pt + 1 {
                return Err(TreeError::TimeGap { node: n.id.clone(), time: n.time, parent_time: pt });
            }
            kids[pi].push(i);
        }
    }

    // Breadth-first renumbering; strictly increasing times rule out cycles.
    let mut order = vec![root];
    let mut head = 0;
    while head < order.len() {
        let cur = order[head];
        head += 1;
        order.extend(kids[cur].iter().copied());
    }
    if order.len() != spec.nodes.len() {
        let seen: std::collections::HashSet<usize> = order.iter().copied().collect();
        let lost = (0..spec.nodes.len()).find(|i| !seen.contains(i)).unwrap_or(0);
        return Err(TreeError::Unreachable(spec.nodes[lost].id.clone()));
    }
    let mut new_id = vec![0usize; spec.nodes.len()];
    for (k, &old) in order.iter().enumerate() {
        new_id[old] = k;
    }

    let mut nodes: Vec<Node<S>> = Vec::with_capacity(order.len());
    for &old in &order {
        let n = &spec.nodes[old];
        nodes.push(Node {
            label: n.id.clone(),
            time: n.time,
            parent: n.parent.as_ref().map(|p| NodeId(new_id[index[p.as_str()]])),
            children: kids[old].iter().map(|&c| NodeId(new_id[c])).collect(),
            weight: S::one(),
            prob: S::one(),
        });
    }

    for &old in &order {
        let n = &spec.nodes[old];
        let ch = &kids[old];
        if ch.is_empty() {
            if n.time != spec.horizon {
                return Err(TreeError::NonTerminalLeaf { node: n.id.clone(), time: n.time, horizon: spec.horizon });
            }
            continue;
        }
        let given = ch.iter().filter(|&&c| spec.nodes[c].weight.is_some()).count();
        let weights: Vec<S> = if given == 0 {
            let w = S::one() / S::from_i64(ch.len() as i64);
            vec![w; ch.len()]
        } else if given == ch.len() {
            ch.iter().map(|&c| spec.nodes[c].weight.clone().unwrap_or_else(S::zero)).collect()
        } else {
            return Err(TreeError::PartialWeights(n.id.clone()));
        };
        let mut sum = S::zero();
        for (&c, w) in ch.iter().zip(&weights) {
            if !(*w > S::zero()) || *w > S::one() + S::tol() {
                return Err(TreeError::BadWeight(spec.nodes[c].id.clone()));
            }
            sum = sum + w.clone();
        }
        let slack = if S::EXACT { S::zero() } else { S::of_f64(1e-12).unwrap_or_else(|_| S::zero()) };
        if (sum.clone() - S::one()).abs() > slack {
            return Err(TreeError::WeightSum { node: n.id.clone(), sum: sum.to_string() });
        }
        for (&c, w) in ch.iter().zip(weights) {
            nodes[new_id[c]].weight = w;
        }
    }
    for k in 1..nodes.len() {
        let p = nodes[k].parent.map(|p| p.0).unwrap_or(0);
        nodes[k].prob = nodes[p].prob.clone() * nodes[k].weight.clone();
    }

    let mut levels = vec![Vec::new(); spec.horizon + 1];
    for (k, n) in nodes.iter().enumerate() {
        levels[n.time].push(NodeId(k));
    }
    Ok(EventTree { nodes, horizon: spec.horizon, levels })
}

impl<S: Scalar> EventTree<S> {
    /// Tree given by parent indices (index 0 is the root, parents precede
    /// children) and transition weights. Labels are the indices.
    pub fn from_parents(parents: &[Option<usize>], weights: &[S]) -> Result<Self, TreeError> {
        let mut times = vec![0usize; parents.len()];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                times[i] = times.get(*p).copied().unwrap_or(0) + 1;
            }
        }
        let horizon = times.iter().copied().max().unwrap_or(0);
        let nodes = parents
            .iter()
            .enumerate()
            .map(|(i, p)| NodeSpec {
                id: i.to_string(),
                parent: p.map(|p| p.to_string()),
                time: times[i],
                weight: p.map(|_| weights[i].clone()),
            })
            .collect();
        build_tree(&TreeSpec { horizon, nodes })
    }

    /// Recombination-free tree where every node at time t has
    /// `branching[t]` equally likely children.
    pub fn uniform(branching: &[usize]) -> Self {
        let mut parents = vec![None];
        let mut frontier = vec![0usize];
        for &b in branching {
            let mut next = Vec::new();
            for &p in &frontier {
                for _ in 0..b.max(1) {
                    parents.push(Some(p));
                    next.push(parents.len() - 1);
                }
            }
            frontier = next;
        }
        let mut weights = vec![S::one(); parents.len()];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                let t = depth_of(&parents, *p);
                weights[i] = S::one() / S::from_i64(branching[t].max(1) as i64);
            }
        }
        Self::from_parents(&parents, &weights).expect("uniform tree is well formed")
    }

    /// Binary tree of depth `horizon` with weights 1/2.
    pub fn binomial(horizon: usize) -> Self {
        Self::uniform(&vec![2; horizon])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }
    pub fn node(&self, id: NodeId) -> &Node<S> {
        &self.nodes[id.0]
    }
    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }
    pub fn ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.nodes.len()).map(NodeId)
    }
    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }
    pub fn time(&self, id: NodeId) -> usize {
        self.nodes[id.0].time
    }
    pub fn weight(&self, id: NodeId) -> &S {
        &self.nodes[id.0].weight
    }
    pub fn prob(&self, id: NodeId) -> &S {
        &self.nodes[id.0].prob
    }
    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id.0].label
    }
    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id.0].children.is_empty()
    }
    pub fn level(&self, t: usize) -> &[NodeId] {
        self.levels.get(t).map(Vec::as_slice).unwrap_or(&[])
    }
    pub fn leaves(&self) -> &[NodeId] {
        self.level(self.horizon)
    }
    pub fn find(&self, label: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.label == label).map(NodeId)
    }

    /// Children of the parent of `id` (including `id`); the root alone for the root.
    pub fn siblings(&self, id: NodeId) -> &[NodeId] {
        match self.parent(id) {
            Some(p) => self.children(p),
            None => std::slice::from_ref(&self.levels[0][0]),
        }
    }

    /// Node sequence from the root down to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Nodes of the subtree rooted at `id`, in increasing id order.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut head = 0;
        while head < out.len() {
            let cur = out[head];
            head += 1;
            out.extend(self.children(cur).iter().copied());
        }
        out.sort();
        out
    }

    /// Same tree over another scalar type.
    pub fn convert<T: Scalar>(&self) -> EventTree<T> {
        EventTree {
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    label: n.label.clone(),
                    time: n.time,
                    parent: n.parent,
                    children: n.children.clone(),
                    weight: T::from_rational(&n.weight.to_rational()),
                    prob: T::from_rational(&n.prob.to_rational()),
                })
                .collect(),
            horizon: self.horizon,
            levels: self.levels.clone(),
        }
    }

    /// Same shape with new transition weights (indexed by node id; the root
    /// entry is ignored). Fails if the weights are not a valid kernel.
    pub fn with_weights(&self, weights: &[S]) -> Result<Self, TreeError> {
        let spec = TreeSpec {
            horizon: self.horizon,
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| NodeSpec {
                    id: n.label.clone(),
                    parent: n.parent.map(|p| self.nodes[p.0].label.clone()),
                    time: n.time,
                    weight: n.parent.map(|_| weights[i].clone()),
                })
                .collect(),
        };
        build_tree(&spec)
    }

    /// Conditional expectation one step ahead: Σ_c w(c)·f(c) over the children of `id`.
    pub fn cond_exp(&self, id: NodeId, f: &TreeProcess<S>) -> S {
        self.children(id)
            .iter()
            .fold(S::zero(), |acc, &c| acc + self.weight(c).clone() * f[c].clone())
    }

    /// Expectation of a function of the terminal node.
    pub fn expect_terminal(&self, f: impl Fn(NodeId) -> S) -> S {
        self.leaves()
            .iter()
            .fold(S::zero(), |acc, &l| acc + self.prob(l).clone() * f(l))
    }
}

fn depth_of(parents: &[Option<usize>], mut i: usize) -> usize {
    let mut d = 0;
    while let Some(p) = parents[i] {
        d += 1;
        i = p;
    }
    d
}

/// A root-to-leaf path together with its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct TreePath<S> {
    pub nodes: Vec<NodeId>,
    pub prob: S,
}

pub fn enumerate_paths<S: Scalar>(tree: &EventTree<S>) -> Vec<TreePath<S>> {
    tree.leaves()
        .iter()
        .map(|&l| TreePath { nodes: tree.path_to(l), prob: tree.prob(l).clone() })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Bid,
    Ask,
    EnvelopeBid,
    EnvelopeAsk,
    Spread,
    Price,
    StrategyStock,
    StrategyBond,
    Wealth,
    Density,
    Generic,
}

/// A value per node. Adaptedness is structural.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeProcess<S> {
    pub role: Role,
    pub values: Vec<S>,
}

impl<S: Scalar> TreeProcess<S> {
    pub fn new(role: Role, values: Vec<S>) -> Self {
        TreeProcess { role, values }
    }
    pub fn constant(tree: &EventTree<S>, role: Role, c: S) -> Self {
        TreeProcess { role, values: vec![c; tree.len()] }
    }
    pub fn zeros(tree: &EventTree<S>, role: Role) -> Self {
        Self::constant(tree, role, S::zero())
    }
    pub fn from_fn(tree: &EventTree<S>, role: Role, f: impl FnMut(NodeId) -> S) -> Self {
        TreeProcess { role, values: tree.ids().map(f).collect() }
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }
    pub fn set(&mut self, id: NodeId, v: S) {
        self.values[id.0] = v;
    }
    pub fn map(&self, role: Role, f: impl Fn(&S) -> S) -> Self {
        TreeProcess { role, values: self.values.iter().map(f).collect() }
    }
    pub fn convert<T: Scalar>(&self) -> TreeProcess<T> {
        TreeProcess { role: self.role, values: self.values.iter().map(|v| T::from_rational(&v.to_rational())).collect() }
    }
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Scalar::as_f64).collect()
    }
}

impl<S> Index<NodeId> for TreeProcess<S> {
    type Output = S;
    fn index(&self, id: NodeId) -> &S {
        &self.values[id.0]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("process `{role:?}` has {got} values for a tree with {expected} nodes")]
    ShapeMismatch { role: Role, got: usize, expected: usize },
}

/// One risky asset with bid and ask price processes on an event tree.
#[derive(Clone, Debug)]
pub struct MarketModel<S> {
    pub tree: EventTree<S>,
    pub bid: TreeProcess<S>,
    pub ask: TreeProcess<S>,
}

impl<S: Scalar> MarketModel<S> {
    pub fn new(tree: EventTree<S>, bid: TreeProcess<S>, ask: TreeProcess<S>) -> Result<Self, ModelError> {
        for p in [&bid, &ask] {
            if p.len() != tree.len() {
                return Err(ModelError::ShapeMismatch { role: p.role, got: p.len(), expected: tree.len() });
            }
        }
        Ok(MarketModel { tree, bid: bid.with_role(Role::Bid), ask: ask.with_role(Role::Ask) })
    }

    /// Model from a per-node `(bid, ask)` function.
    pub fn from_fn(tree: EventTree<S>, mut f: impl FnMut(NodeId) -> (S, S)) -> Self {
        let (bid, ask): (Vec<S>, Vec<S>) = tree.ids().map(&mut f).unzip();
        MarketModel { bid: TreeProcess::new(Role::Bid, bid), ask: TreeProcess::new(Role::Ask, ask), tree }
    }

    /// Frictionless model with bid = ask = `price`.
    pub fn frictionless(tree: EventTree<S>, price: &TreeProcess<S>) -> Self {
        MarketModel {
            bid: price.clone().with_role(Role::Bid),
            ask: price.clone().with_role(Role::Ask),
            tree,
        }
    }

    pub fn convert<T: Scalar>(&self) -> MarketModel<T> {
        MarketModel { tree: self.tree.convert(), bid: self.bid.convert(), ask: self.ask.convert() }
    }

    /// Multiplies both price processes by `c`.
    pub fn scaled(&self, c: &S) -> Self {
        MarketModel {
            tree: self.tree.clone(),
            bid: self.bid.map(Role::Bid, |v| v.clone() * c.clone()),
            ask: self.ask.map(Role::Ask, |v| v.clone() * c.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    BidAboveAsk,
    NegativeBid,
    TerminalAskNotPositive,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::BidAboveAsk => "bid > ask",
            ViolationKind::NegativeBid => "negative bid",
            ViolationKind::TerminalAskNotPositive => "terminal ask not positive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub node: NodeId,
    pub label: String,
    pub kind: ViolationKind,
}

/// Lists every node that breaks `0 ≤ bid ≤ ask` or `ask_T > 0`.
pub fn validate_market<S: Scalar>(model: &MarketModel<S>) -> Vec<Violation> {
    let tree = &model.tree;
    let mut out = Vec::new();
    for id in tree.ids() {
        let push = |out: &mut Vec<Violation>, kind| {
            out.push(Violation { node: id, label: tree.label(id).to_string(), kind })
        };
        if model.bid[id] < S::zero() {
            push(&mut out, ViolationKind::NegativeBid);
        }
        if model.bid[id] > model.ask[id] {
            push(&mut out, ViolationKind::BidAboveAsk);
        }
        if tree.is_leaf(id) && model.ask[id] <= S::zero() {
            push(&mut out, ViolationKind::TerminalAskNotPositive);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use num_traits::{One, Zero};

    #[test]
    fn single_root() {
        let t: EventTree<Rational> = build_tree(&TreeSpec::new(0).root("r")).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(enumerate_paths(&t).len(), 1);
        assert!(enumerate_paths(&t)[0].prob.is_one());
    }

    #[test]
    fn binomial_paths() {
        let t: EventTree<Rational> = EventTree::binomial(2);
        assert_eq!(t.len(), 7);
        let paths = enumerate_paths(&t);
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p.prob == rat(1, 4) && p.nodes.len() == 3));
    }

    #[test]
    fn product_rule() {
        let spec = TreeSpec::new(1).root("r").child("a", "r", rat(3, 10)).child("b", "r", rat(7, 10));
        let t = build_tree(&spec).unwrap();
        let probs: Vec<_> = enumerate_paths(&t).into_iter().map(|p| p.prob).collect();
        assert_eq!(probs, vec![rat(3, 10), rat(7, 10)]);
    }

    #[test]
    fn trinomial() {
        let spec = TreeSpec::new(1)
            .root("r")
            .child("a", "r", rat(1, 5))
            .child("b", "r", rat(3, 10))
            .child("c", "r", rat(1, 2));
        let t = build_tree(&spec).unwrap();
        let probs: Vec<_> = enumerate_paths(&t).into_iter().map(|p| p.prob).collect();
        assert_eq!(probs, vec![rat(1, 5), rat(3, 10), rat(1, 2)]);
    }

    #[test]
    fn rejects_malformed() {
        let bad_sum = TreeSpec::new(1).root("r").child("a", "r", rat(1, 2)).child("b", "r", rat(1, 3));
        assert!(matches!(build_tree(&bad_sum), Err(TreeError::WeightSum { .. })));

        let short = TreeSpec::new(2).root("r").child("a", "r", Rational::one());
        assert!(matches!(build_tree(&short), Err(TreeError::NonTerminalLeaf { .. })));

        let zero_w = TreeSpec::new(1).root("r").child("a", "r", Rational::zero()).child("b", "r", Rational::one());
        assert!(matches!(build_tree(&zero_w), Err(TreeError::BadWeight(_))));

        let mut gap = TreeSpec::new(2).root("r").child("a", "r", Rational::one());
        gap.nodes[1].time = 2;
        assert!(matches!(build_tree(&gap), Err(TreeError::TimeGap { .. })));

        let none: TreeSpec<Rational> = TreeSpec::new(0);
        assert_eq!(build_tree(&none).unwrap_err(), TreeError::MissingRoot);

        let two = TreeSpec::<Rational>::new(0).root("a").root("b");
        assert!(matches!(build_tree(&two), Err(TreeError::MultipleRoots(..))));

        let mut orphan = TreeSpec::new(1).root("r").child("a", "r", Rational::one());
        orphan.nodes[1].parent = Some("zz".into());
        assert!(matches!(build_tree(&orphan), Err(TreeError::UnknownParent { .. })));
    }

    #[test]
    fn validation_messages() {
        let t: EventTree<Rational> = EventTree::binomial(1);
        let ok = MarketModel::from_fn(t.clone(), |_| (Rational::one(), Rational::one()));
        assert!(validate_market(&ok).is_empty());

        let crossed = MarketModel::from_fn(t.clone(), |id| {
            if id.0 == 1 { (rat(2, 1), rat(1, 1)) } else { (rat(1, 1), rat(1, 1)) }
        });
        let v = validate_market(&crossed);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind.to_string(), "bid > ask");
        assert_eq!(v[0].node, NodeId(1));

        let dead = MarketModel::from_fn(t, |id| if id.0 == 2 { (Rational::zero(), Rational::zero()) } else { (rat(1, 1), rat(1, 1)) });
        let v = validate_market(&dead);
        assert_eq!(v[0].kind.to_string(), "terminal ask not positive");
    }

    #[test]
    fn float_weights_tolerance() {
        let spec = TreeSpec::new(1).root("r").child("a", "r", 0.1f64).child("b", "r", 0.2).child("c", "r", 0.7);
        let t = build_tree(&spec).unwrap();
        let total: f64 = enumerate_paths(&t).iter().map(|p| p.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
