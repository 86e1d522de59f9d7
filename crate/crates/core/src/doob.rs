//! Discrete Doob decomposition, second-moment bounds for nearly null
//! supermartingales, and Émery / uniform distance estimators on trees.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::tree::{EventTree, NodeId, Role, TreeProcess};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DoobError {
    #[error("not a supermartingale: conditional drift {drift} > 0 at node {node}")]
    NotSupermartingale { node: NodeId, drift: String },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("process has {got} values, tree has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DoobMode {
    /// Any adapted process; the drift may decrease.
    General,
    /// Require a supermartingale so that the drift is nondecreasing.
    Supermartingale,
}

/// `Y = M - A` with `A` predictable and `A(root) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoobDecomposition<S> {
    pub martingale: TreeProcess<S>,
    pub drift: TreeProcess<S>,
}

fn check_shape<S: Scalar>(tree: &EventTree<S>, p: &TreeProcess<S>) -> Result<(), DoobError> {
    if p.len() == tree.len() {
        Ok(())
    } else {
        Err(DoobError::ShapeMismatch { expected: tree.len(), got: p.len() })
    }
}

/// The increment of `A` into every child of `n` is `Y(n) - E(Y(child) | n)`.
pub fn doob_decompose<S: Scalar>(tree: &EventTree<S>, y: &TreeProcess<S>, mode: DoobMode) -> Result<DoobDecomposition<S>, DoobError> {
    check_shape(tree, y)?;
    let mut a = vec![S::zero(); tree.len()];
    for id in tree.ids() {
        if tree.is_leaf(id) {
            continue;
        }
        let mut inc = y[id].clone() - tree.cond_exp(id, y);
        if mode == DoobMode::Supermartingale {
            if inc < -S::tol() {
                return Err(DoobError::NotSupermartingale { node: id, drift: (-inc).to_string() });
            }
            inc = inc.max_of(S::zero());
        }
        for &c in tree.children(id) {
            a[c.0] = a[id.0].clone() + inc.clone();
        }
    }
    let drift = TreeProcess::new(Role::Generic, a);
    let martingale = TreeProcess::from_fn(tree, Role::Generic, |id| y[id].clone() + drift[id].clone());
    Ok(DoobDecomposition { martingale, drift })
}

/// Second moments at the horizon against the stated bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport<S> {
    pub e_a2: S,
    pub e_m2: S,
    /// `(ε₁+1)(ε₂+ε₃)`.
    pub bound_a2: S,
    /// `ε₁² + ε₂ + ε₂² + 2ε₃ + 3ε₁ε₂ + 3ε₁ε₃`.
    pub bound_m2: S,
    /// `2(ε₁+1)(ε₂+ε₃)`, the bound delivered by Meyer's energy inequality.
    pub bound_a2_energy: S,
    pub a_holds: bool,
    pub m_holds: bool,
    pub energy_holds: bool,
}

impl<S: Scalar> MomentReport<S> {
    pub fn holds(&self) -> bool {
        self.a_holds && self.m_holds
    }
    pub fn ratio_a(&self) -> f64 {
        ratio(&self.e_a2, &self.bound_a2)
    }
    pub fn ratio_m(&self) -> f64 {
        ratio(&self.e_m2, &self.bound_m2)
    }
}

fn ratio<S: Scalar>(a: &S, b: &S) -> f64 {
    if b.is_pos() {
        a.as_f64() / b.as_f64()
    } else {
        0.0
    }
}

/// Checks the preconditions (`Y_0 = 0`, `-1 ≤ Y ≤ ε₁`, supermartingale,
/// `P(Y_T < -ε₂) ≤ ε₃`, all ε positive) and evaluates both moment bounds
/// with exact expectations.
pub fn verify_moment_bounds<S: Scalar>(
    tree: &EventTree<S>,
    y: &TreeProcess<S>,
    eps1: &S,
    eps2: &S,
    eps3: &S,
) -> Result<MomentReport<S>, DoobError> {
    check_shape(tree, y)?;
    if !(eps1.is_pos() && eps2.is_pos() && eps3.is_pos()) {
        return Err(DoobError::PreconditionFailed("tolerances must be positive".into()));
    }
    let tol = S::tol();
    if y[tree.root()].clone().abs() > tol {
        return Err(DoobError::PreconditionFailed(format!("Y_0 = {} is not zero", y[tree.root()])));
    }
    for id in tree.ids() {
        if y[id] < -S::one() - tol.clone() || y[id] > eps1.clone() + tol.clone() {
            return Err(DoobError::PreconditionFailed(format!("Y = {} at node {id} is outside [-1, {eps1}]", y[id])));
        }
    }
    let tail = tree.expect_terminal(|l| if y[l] < -eps2.clone() { S::one() } else { S::zero() });
    if tail > eps3.clone() + tol {
        return Err(DoobError::PreconditionFailed(format!("P(Y_T < -{eps2}) = {tail} exceeds {eps3}")));
    }
    let dec = doob_decompose(tree, y, DoobMode::Supermartingale).map_err(|e| DoobError::PreconditionFailed(e.to_string()))?;
    let e_a2 = tree.expect_terminal(|l| dec.drift[l].clone() * dec.drift[l].clone());
    let e_m2 = tree.expect_terminal(|l| dec.martingale[l].clone() * dec.martingale[l].clone());
    let (e1, e2, e3) = (eps1.clone(), eps2.clone(), eps3.clone());
    let bound_a2 = (e1.clone() + S::one()) * (e2.clone() + e3.clone());
    let three = S::from_i64(3);
    let two = S::from_i64(2);
    let bound_m2 = e1.clone() * e1.clone()
        + e2.clone()
        + e2.clone() * e2.clone()
        + two.clone() * e3.clone()
        + three.clone() * e1.clone() * e2
        + three * e1 * e3;
    let bound_a2_energy = two * bound_a2.clone();
    Ok(MomentReport {
        a_holds: e_a2 <= bound_a2.clone() + S::tol(),
        m_holds: e_m2 <= bound_m2.clone() + S::tol(),
        energy_holds: e_a2 <= bound_a2_energy.clone() + S::tol(),
        e_a2,
        e_m2,
        bound_a2,
        bound_m2,
        bound_a2_energy,
    })
}

/// `E(f(path))` where `f` sees the values of `x` along each root-to-leaf path.
fn expect_path<S: Scalar>(tree: &EventTree<S>, mut f: impl FnMut(&[NodeId]) -> S) -> S {
    let mut total = S::zero();
    for &l in tree.leaves() {
        let path = tree.path_to(l);
        total = total + tree.prob(l).clone() * f(&path);
    }
    total
}

/// `E(sup_t |H•X_t| ∧ 1)` for a predictable sign `h` (value at the parent applies to the step into a child).
fn integral_value<S: Scalar>(tree: &EventTree<S>, x: &TreeProcess<S>, h: &[S]) -> S {
    expect_path(tree, |path| {
        let mut acc = S::zero();
        let mut best = S::zero();
        for w in path.windows(2) {
            acc = acc + h[w[0].0].clone() * (x[w[1]].clone() - x[w[0]].clone());
            best = best.max_of(acc.clone().abs());
        }
        best.min_of(S::one())
    })
}

/// Certified bounds `lower ≤ d_S(X, 0) ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmeryBounds<S> {
    pub lower: S,
    pub upper: S,
}

/// Lower bound from predictable signs (conditional drift sign, constant ±1,
/// and `random_candidates` random sign patterns); upper bound from the capped
/// total variation.
pub fn emery_distance_bounds<S: Scalar, R: Rng>(
    tree: &EventTree<S>,
    x: &TreeProcess<S>,
    rng: &mut R,
    random_candidates: usize,
) -> Result<EmeryBounds<S>, DoobError> {
    check_shape(tree, x)?;
    let n = tree.len();
    let greedy: Vec<S> = tree
        .ids()
        .map(|id| {
            if tree.is_leaf(id) {
                return S::zero();
            }
            let drift = tree.cond_exp(id, x) - x[id].clone();
            if drift.is_neg() {
                -S::one()
            } else {
                S::one()
            }
        })
        .collect();
    let mut lower = integral_value(tree, x, &greedy);
    lower = lower.max_of(integral_value(tree, x, &vec![S::one(); n]));
    for _ in 0..random_candidates {
        let h: Vec<S> = (0..n).map(|_| S::from_i64(rng.random_range(-1..=1))).collect();
        lower = lower.max_of(integral_value(tree, x, &h));
    }
    let upper = expect_path(tree, |path| {
        let tv = path.windows(2).fold(S::zero(), |acc, w| acc + (x[w[1]].clone() - x[w[0]].clone()).abs());
        tv.min_of(S::one())
    });
    Ok(EmeryBounds { lower, upper })
}

/// `√(27ε+72ε²) + √(18ε+18ε²) + ε`.
pub fn emery_constant(eps: f64) -> f64 {
    (27.0 * eps + 72.0 * eps * eps).sqrt() + (18.0 * eps + 18.0 * eps * eps).sqrt() + eps
}

/// `E(sup_t |X_t - Y_t| ∧ 1)` with exact tree expectations.
pub fn d_up<S: Scalar>(tree: &EventTree<S>, x: &TreeProcess<S>, y: &TreeProcess<S>) -> Result<S, DoobError> {
    check_shape(tree, x)?;
    check_shape(tree, y)?;
    Ok(expect_path(tree, |path| {
        path.iter()
            .fold(S::zero(), |m, &id| m.max_of((x[id].clone() - y[id].clone()).abs()))
            .min_of(S::one())
    }))
}

/// Monte Carlo `E(sup_t |X_t - Y_t| ∧ 1)` over equally weighted sampled paths.
pub fn d_up_paths(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64, DoobError> {
    if x.len() != y.len() || x.iter().zip(y).any(|(a, b)| a.len() != b.len()) {
        return Err(DoobError::ShapeMismatch { expected: x.len(), got: y.len() });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| a.iter().zip(b).fold(0.0f64, |m, (u, v)| m.max((u - v).abs())).min(1.0))
        .sum();
    Ok(total / x.len() as f64)
}
