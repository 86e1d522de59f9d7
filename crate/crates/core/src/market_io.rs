//! JSON market and strategy descriptions.
//!
//! Market: `{ "horizon": T, "nodes": [{ "id", "parent", "time", "weight" }],
//! "bid": {id: value}, "ask": {id: value} }`. Values are decimal or fraction
//! strings, or JSON numbers (read through their decimal text).

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::scalar::{rational_from_json, Scalar, ScalarError};
use crate::tree::{build_tree, EventTree, MarketModel, ModelError, NodeId, NodeSpec, Role, TreeError, TreeProcess, TreeSpec};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed spec: {0}")]
    Field(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed spec: {0}")]
    Scalar(#[from] ScalarError),
    #[error("malformed spec: unknown node `{0}`")]
    UnknownNode(String),
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, FormatError> {
    obj.get(key).ok_or_else(|| FormatError::Field(format!("missing field `{key}`")))
}

fn scalar<S: Scalar>(v: &Value) -> Result<S, FormatError> {
    Ok(S::from_rational(&rational_from_json(v)?))
}

fn node_key(v: &Value) -> Result<String, FormatError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(FormatError::Field(format!("node id must be a string or integer, got {other}"))),
    }
}

pub fn parse_tree_value<S: Scalar>(v: &Value) -> Result<EventTree<S>, FormatError> {
    let obj = v.as_object().ok_or_else(|| FormatError::Field("top level must be an object".into()))?;
    let horizon = field(obj, "horizon")?
        .as_u64()
        .ok_or_else(|| FormatError::Field("`horizon` must be a nonnegative integer".into()))? as usize;
    let nodes = field(obj, "nodes")?
        .as_array()
        .ok_or_else(|| FormatError::Field("`nodes` must be an array".into()))?;
    let mut spec = TreeSpec::new(horizon);
    for n in nodes {
        let n = n.as_object().ok_or_else(|| FormatError::Field("node entries must be objects".into()))?;
        let id = node_key(field(n, "id")?)?;
        let parent = match n.get("parent") {
            None | Some(Value::Null) => None,
            Some(p) => Some(node_key(p)?),
        };
        let time = field(n, "time")?
            .as_u64()
            .ok_or_else(|| FormatError::Field(format!("node `{id}`: `time` must be a nonnegative integer")))? as usize;
        let weight = match n.get("weight") {
            None | Some(Value::Null) => None,
            Some(w) => Some(scalar::<S>(w)?),
        };
        spec.nodes.push(NodeSpec { id, parent, time, weight });
    }
    Ok(build_tree(&spec)?)
}

/// Reads a per-node value map (`{id: value}`) into a process on `tree`.
pub fn parse_process<S: Scalar>(tree: &EventTree<S>, v: &Value, role: Role, name: &str) -> Result<TreeProcess<S>, FormatError> {
    let obj = v.as_object().ok_or_else(|| FormatError::Field(format!("`{name}` must be an object mapping node ids to values")))?;
    let mut values: Vec<Option<S>> = vec![None; tree.len()];
    for (k, val) in obj {
        let id = tree.find(k).ok_or_else(|| FormatError::UnknownNode(k.clone()))?;
        values[id.0] = Some(scalar::<S>(val)?);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| FormatError::Field(format!("`{name}` has no value for node `{}`", tree.label(NodeId(i))))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TreeProcess::new(role, values))
}

pub fn parse_market_value<S: Scalar>(v: &Value) -> Result<MarketModel<S>, FormatError> {
    let tree = parse_tree_value::<S>(v)?;
    let obj = v.as_object().expect("checked by parse_tree_value");
    let bid = parse_process(&tree, field(obj, "bid")?, Role::Bid, "bid")?;
    let ask = parse_process(&tree, field(obj, "ask")?, Role::Ask, "ask")?;
    Ok(MarketModel::new(tree, bid, ask)?)
}

pub fn parse_market<S: Scalar>(text: &str) -> Result<MarketModel<S>, FormatError> {
    parse_market_value(&serde_json::from_str(text)?)
}

/// Stock holdings, either as a bare `{id: value}` map or under a `"stock"` key.
/// Nodes without an entry inherit the parent's holding (zero at the root).
pub fn parse_strategy<S: Scalar>(tree: &EventTree<S>, text: &str) -> Result<TreeProcess<S>, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v.as_object().ok_or_else(|| FormatError::Field("strategy must be an object".into()))?;
    let map = match obj.get("stock") {
        Some(Value::Object(m)) => m,
        _ => obj,
    };
    let mut given: Vec<Option<S>> = vec![None; tree.len()];
    for (k, val) in map {
        let id = tree.find(k).ok_or_else(|| FormatError::UnknownNode(k.clone()))?;
        given[id.0] = Some(scalar::<S>(val)?);
    }
    let mut stock = TreeProcess::zeros(tree, Role::StrategyStock);
    for id in tree.ids() {
        let v = match given[id.0].take() {
            Some(v) => v,
            None => tree.parent(id).map(|p| stock[p].clone()).unwrap_or_else(S::zero),
        };
        stock.set(id, v);
    }
    Ok(stock)
}

/// Per-node map keyed by label, in node order.
pub fn process_json<S: Scalar>(tree: &EventTree<S>, p: &TreeProcess<S>) -> Value {
    let mut m = Map::new();
    for id in tree.ids() {
        m.insert(tree.label(id).to_string(), p[id].to_json());
    }
    Value::Object(m)
}

/// Serializes a market in the input format.
pub fn market_json<S: Scalar>(model: &MarketModel<S>) -> Value {
    let tree = &model.tree;
    let nodes: Vec<Value> = tree
        .ids()
        .map(|id| {
            let parent = tree.parent(id).map(|p| Value::String(tree.label(p).to_string())).unwrap_or(Value::Null);
            let weight = if tree.parent(id).is_some() { tree.weight(id).to_json() } else { Value::Null };
            json!({ "id": tree.label(id), "parent": parent, "time": tree.time(id), "weight": weight })
        })
        .collect();
    json!({
        "horizon": tree.horizon(),
        "nodes": nodes,
        "bid": process_json(tree, &model.bid),
        "ask": process_json(tree, &model.ask),
    })
}

/// Sorted label → value view, handy in tests.
pub fn labelled<S: Scalar>(tree: &EventTree<S>, p: &TreeProcess<S>) -> BTreeMap<String, S> {
    tree.ids().map(|id| (tree.label(id).to_string(), p[id].clone())).collect()
}
