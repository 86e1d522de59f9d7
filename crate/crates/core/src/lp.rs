//! Dense two-phase primal simplex, generic over the scalar kernel.
//!
//! All variables are nonnegative; free variables are modelled by the caller
//! as differences. Pivoting uses Dantzig's rule and switches to Bland's rule
//! after a run of degenerate steps, which guarantees termination in exact
//! arithmetic.

use thiserror::Error;

use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<S> {
    pub terms: Vec<(usize, S)>,
    pub cmp: Cmp,
    pub rhs: S,
}

/// `maximize objective·x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram<S> {
    pub n_vars: usize,
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<S> {
    pub value: S,
    pub x: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal(LpSolution<S>),
    Infeasible,
    Unbounded,
}

impl<S> LpOutcome<S> {
    pub fn optimal(self) -> Option<LpSolution<S>> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("LP numerical failure: {0}")]
    NumericalFailure(String),
    #[error("LP iteration limit {0} reached")]
    IterationLimit(usize),
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { n_vars, objective: vec![S::zero(); n_vars], constraints: Vec::new() }
    }

    pub fn add_var(&mut self) -> usize {
        self.n_vars += 1;
        self.objective.push(S::zero());
        self.n_vars - 1
    }

    pub fn add_vars(&mut self, k: usize) -> usize {
        let first = self.n_vars;
        for _ in 0..k {
            self.add_var();
        }
        first
    }

    pub fn set_objective(&mut self, terms: &[(usize, S)]) {
        self.objective = vec![S::zero(); self.n_vars];
        for (j, c) in terms {
            self.objective[*j] = self.objective[*j].clone() + c.clone();
        }
    }

    pub fn constrain(&mut self, terms: Vec<(usize, S)>, cmp: Cmp, rhs: S) {
        self.constraints.push(Constraint { terms, cmp, rhs });
    }

    pub fn convert<T: Scalar>(&self) -> LinearProgram<T> {
        let conv = |v: &S| T::from_rational(&v.to_rational());
        LinearProgram {
            n_vars: self.n_vars,
            objective: self.objective.iter().map(conv).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    terms: c.terms.iter().map(|(j, v)| (*j, conv(v))).collect(),
                    cmp: c.cmp,
                    rhs: conv(&c.rhs),
                })
                .collect(),
        }
    }

    /// Largest violation of the constraints and sign conditions at `x`.
    pub fn max_violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for v in x {
            worst = worst.max_of(v.neg_part());
        }
        for c in &self.constraints {
            let lhs = c.terms.iter().fold(S::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone());
            let d = lhs - c.rhs.clone();
            let viol = match c.cmp {
                Cmp::Le => d.pos_part(),
                Cmp::Ge => d.neg_part(),
                Cmp::Eq => d.abs(),
            };
            worst = worst.max_of(viol);
        }
        worst
    }

    pub fn value_at(&self, x: &[S]) -> S {
        self.objective.iter().zip(x).fold(S::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    obj: Vec<S>,
    basis: Vec<usize>,
    ncols: usize,
    allowed: Vec<bool>,
    iterations: usize,
    limit: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

fn pivot_tol<S: Scalar>() -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::of_f64(1e-9).unwrap_or_else(|_| S::zero())
    }
}

fn flush<S: Scalar>(v: &mut S) {
    if !S::EXACT && v.abs() < S::of_f64(1e-13).unwrap_or_else(|_| S::zero()) {
        *v = S::zero();
    }
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / piv.clone();
            }
        }
        self.rows[r][c] = S::one();
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<S>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let mut v = row[j].clone() - f.clone() * pivot_row[j].clone();
                flush(&mut v);
                row[j] = v;
            }
            row[c] = S::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let tol = S::tol();
        let mut best: Option<usize> = None;
        for j in 0..self.ncols {
            if !self.allowed[j] || !(self.obj[j] < -tol.clone()) {
                continue;
            }
            if bland {
                return Some(j);
            }
            match best {
                Some(b) if self.obj[j] >= self.obj[b] => {}
                _ => best = Some(j),
            }
        }
        best
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let tol = pivot_tol::<S>();
        let mut best: Option<(usize, S)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !(row[c] > tol) {
                continue;
            }
            let ratio = row[self.ncols].clone() / row[c].clone();
            best = match best {
                None => Some((i, ratio)),
                Some((b, br)) => {
                    let better = if S::EXACT {
                        ratio < br || (ratio == br && self.basis[i] < self.basis[b])
                    } else {
                        let d = ratio.clone() - br.clone();
                        d.is_neg() || (d.approx_zero() && self.basis[i] < self.basis[b])
                    };
                    if better {
                        Some((i, ratio))
                    } else {
                        Some((b, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self) -> Result<Phase, LpError> {
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            let Some(c) = self.entering(bland) else {
                return Ok(Phase::Optimal);
            };
            let Some(r) = self.leaving(c) else {
                return Ok(Phase::Unbounded);
            };
            if self.rows[r][self.ncols].approx_zero() {
                degenerate += 1;
                if degenerate > 50 {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(LpError::IterationLimit(self.limit));
            }
        }
    }
}

/// Solves the program in the kernel's own arithmetic.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpOutcome<S>, LpError> {
    let n = lp.n_vars;
    let m = lp.constraints.len();

    // Normalize to nonnegative right-hand sides.
    let mut rows_in: Vec<(Vec<(usize, S)>, Cmp, S)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        if c.terms.is_empty() {
            let ok = match c.cmp {
                Cmp::Le => c.rhs.is_nonneg(),
                Cmp::Ge => !c.rhs.is_pos(),
                Cmp::Eq => c.rhs.approx_zero(),
            };
            if !ok {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        if c.rhs < S::zero() {
            let cmp = match c.cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
            rows_in.push((c.terms.iter().map(|(j, v)| (*j, -v.clone())).collect(), cmp, -c.rhs.clone()));
        } else {
            rows_in.push((c.terms.clone(), c.cmp, c.rhs.clone()));
        }
    }
    let m = rows_in.len();
    let n_slack = rows_in.iter().filter(|r| r.1 != Cmp::Eq).count();
    let n_art = rows_in.iter().filter(|r| r.1 != Cmp::Le).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut rows = vec![vec![S::zero(); ncols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut is_art_row = vec![false; m];
    let (mut s_idx, mut a_idx) = (n, art_start);
    for (i, (terms, cmp, rhs)) in rows_in.into_iter().enumerate() {
        for (j, v) in terms {
            rows[i][j] = rows[i][j].clone() + v;
        }
        rows[i][ncols] = rhs;
        match cmp {
            Cmp::Le => {
                rows[i][s_idx] = S::one();
                basis[i] = s_idx;
                s_idx += 1;
            }
            Cmp::Ge => {
                rows[i][s_idx] = -S::one();
                s_idx += 1;
                rows[i][a_idx] = S::one();
                basis[i] = a_idx;
                a_idx += 1;
                is_art_row[i] = true;
            }
            Cmp::Eq => {
                rows[i][a_idx] = S::one();
                basis[i] = a_idx;
                a_idx += 1;
                is_art_row[i] = true;
            }
        }
    }

    let limit = 20_000 + 50 * (m + ncols);
    let mut tab = Tableau { rows, obj: vec![S::zero(); ncols + 1], basis, ncols, allowed: vec![true; ncols], iterations: 0, limit };

    if n_art > 0 {
        for (i, row) in tab.rows.iter().enumerate() {
            if is_art_row[i] {
                for j in 0..=ncols {
                    if j < art_start || j == ncols {
                        tab.obj[j] = tab.obj[j].clone() - row[j].clone();
                    }
                }
            }
        }
        tab.run()?;
        let infeas = -tab.obj[ncols].clone();
        let feas_tol = if S::EXACT { S::zero() } else { S::of_f64(1e-8).unwrap_or_else(|_| S::zero()) };
        if infeas > feas_tol {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive artificial variables out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                let tol = pivot_tol::<S>();
                let col = (0..art_start).find(|&j| tab.rows[r][j].abs() > tol);
                match col {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for j in art_start..ncols {
            tab.allowed[j] = false;
        }
    }

    // Phase two: minimize -objective.
    let cost = |j: usize| if j < n { -lp.objective[j].clone() } else { S::zero() };
    let mut obj = vec![S::zero(); ncols + 1];
    for j in 0..ncols {
        obj[j] = cost(j);
    }
    for (i, row) in tab.rows.iter().enumerate() {
        let cb = cost(tab.basis[i]);
        if cb.is_zero() {
            continue;
        }
        for j in 0..=ncols {
            if !row[j].is_zero() {
                obj[j] = obj[j].clone() - cb.clone() * row[j].clone();
            }
        }
    }
    tab.obj = obj;
    match tab.run()? {
        Phase::Unbounded => Ok(LpOutcome::Unbounded),
        Phase::Optimal => {
            let mut x = vec![S::zero(); n];
            for (i, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    x[b] = tab.rows[i][ncols].clone();
                }
            }
            if !S::EXACT {
                for v in x.iter_mut() {
                    if *v < S::zero() {
                        *v = S::zero();
                    }
                }
                let viol = lp.max_violation(&x);
                if viol > S::of_f64(1e-7).unwrap_or_else(|_| S::zero()) {
                    return Err(LpError::NumericalFailure(format!("constraint violation {viol} at returned vertex")));
                }
            }
            let value = lp.value_at(&x);
            Ok(LpOutcome::Optimal(LpSolution { value, x }))
        }
    }
}

/// Solves in the kernel's arithmetic; a float failure is retried with exact
/// rationals. The flag reports whether the retry happened.
pub fn solve_with_fallback<S: Scalar>(lp: &LinearProgram<S>) -> Result<(LpOutcome<S>, bool), LpError> {
    match solve(lp) {
        Ok(out) => Ok((out, false)),
        Err(e) if S::EXACT => Err(e),
        Err(_) => {
            let exact: LinearProgram<Rational> = lp.convert();
            let out = solve(&exact)?;
            let back = match out {
                LpOutcome::Optimal(s) => LpOutcome::Optimal(LpSolution {
                    value: S::from_rational(&s.value),
                    x: s.x.iter().map(S::from_rational).collect(),
                }),
                LpOutcome::Infeasible => LpOutcome::Infeasible,
                LpOutcome::Unbounded => LpOutcome::Unbounded,
            };
            Ok((back, true))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn r(n: i64) -> Rational {
        rat(n, 1)
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.set_objective(&[(0, r(3)), (1, r(5))]);
        lp.constrain(vec![(0, r(1))], Cmp::Le, r(4));
        lp.constrain(vec![(1, r(2))], Cmp::Le, r(12));
        lp.constrain(vec![(0, r(3)), (1, r(2))], Cmp::Le, r(18));
        let s = solve(&lp).unwrap().optimal().unwrap();
        assert_eq!(s.value, r(36));
        assert_eq!(s.x, vec![r(2), r(6)]);
    }

    #[test]
    fn equality_and_ge() {
        // min x + y (as max -x - y), x + y ≥ 2, x - y = 1 → 2 at (3/2, 1/2)
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.set_objective(&[(0, r(-1)), (1, r(-1))]);
        lp.constrain(vec![(0, r(1)), (1, r(1))], Cmp::Ge, r(2));
        lp.constrain(vec![(0, r(1)), (1, r(-1))], Cmp::Eq, r(1));
        let s = solve(&lp).unwrap().optimal().unwrap();
        assert_eq!(s.value, r(-2));
        assert_eq!(s.x, vec![rat(3, 2), rat(1, 2)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.constrain(vec![(0, r(1))], Cmp::Le, r(1));
        lp.constrain(vec![(0, r(1))], Cmp::Ge, r(2));
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::<Rational>::new(2);
        lp.set_objective(&[(0, r(1))]);
        lp.constrain(vec![(0, r(1)), (1, r(-1))], Cmp::Le, r(1));
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // -x ≤ -1 means x ≥ 1; duplicated equality row is redundant.
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.set_objective(&[(0, r(-1)), (1, r(-2))]);
        lp.constrain(vec![(0, r(-1))], Cmp::Le, r(-1));
        lp.constrain(vec![(0, r(1)), (1, r(1))], Cmp::Eq, r(3));
        lp.constrain(vec![(0, r(2)), (1, r(2))], Cmp::Eq, r(6));
        let s = solve(&lp).unwrap().optimal().unwrap();
        assert_eq!(s.x, vec![r(3), r(0)]);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule without safeguards.
        let mut lp = LinearProgram::<Rational>::new(4);
        lp.set_objective(&[(0, rat(3, 4)), (1, r(-150)), (2, rat(1, 50)), (3, r(-6))]);
        lp.constrain(vec![(0, rat(1, 4)), (1, r(-60)), (2, rat(-1, 25)), (3, r(9))], Cmp::Le, r(0));
        lp.constrain(vec![(0, rat(1, 2)), (1, r(-90)), (2, rat(-1, 50)), (3, r(3))], Cmp::Le, r(0));
        lp.constrain(vec![(2, r(1))], Cmp::Le, r(1));
        let s = solve(&lp).unwrap().optimal().unwrap();
        assert_eq!(s.value, rat(1, 20));
    }

    #[test]
    fn float_matches_exact() {
        let mut lp = LinearProgram::<f64>::new(3);
        lp.set_objective(&[(0, 2.0), (1, 3.0), (2, 1.0)]);
        lp.constrain(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Cmp::Le, 4.0);
        lp.constrain(vec![(0, 1.0), (1, 3.0)], Cmp::Le, 6.0);
        lp.constrain(vec![(2, 1.0)], Cmp::Ge, 0.5);
        let (out, fell_back) = solve_with_fallback(&lp).unwrap();
        let s = out.optimal().unwrap();
        let exact = solve(&lp.convert::<Rational>()).unwrap().optimal().unwrap();
        assert!(!fell_back);
        assert!((s.value - exact.value.as_f64()).abs() < 1e-9);
    }
}
