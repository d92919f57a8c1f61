//! Linear constraints over configurations and the reasoning built on them.
//!
//! Every question is reduced to rational feasibility of a linear system over
//! nonnegative variables, solved exactly by [`simplex`]. Negating a constraint
//! uses integer tightening (`not (a.x >= b)` becomes `a.x <= b - 1`), which
//! is valid because coefficients are integers and configurations are integer
//! points. The rational relaxation can miss integer-only arguments; this
//! surfaces as [`Entailment::NotProved`] and never as a wrong proof.

pub mod simplex;

use std::fmt;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::model::{Configuration, Predicate, Protocol, StateId, Transition};
use simplex::{rat, LpOutcome, Problem, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// `sum_q coeffs[q] * C(q)  relation  constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    coeffs: Vec<i64>,
    relation: Relation,
    constant: i64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<i64>, relation: Relation, constant: i64) -> Self {
        LinearConstraint {
            coeffs,
            relation,
            constant,
        }
    }

    /// `sum_{q in states} C(q) relation constant`.
    pub fn sum(dim: usize, states: &[StateId], relation: Relation, constant: i64) -> Self {
        let mut coeffs = vec![0; dim];
        for &q in states {
            coeffs[q] += 1;
        }
        Self::new(coeffs, relation, constant)
    }

    pub fn always_false(dim: usize) -> Self {
        Self::new(vec![0; dim], Relation::Ge, 1)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn holds(&self, c: &Configuration) -> bool {
        let lhs = c.dot(&self.coeffs);
        match self.relation {
            Relation::Le => lhs <= self.constant,
            Relation::Eq => lhs == self.constant,
            Relation::Ge => lhs >= self.constant,
        }
    }

    /// The constraint evaluated at `C + delta` instead of `C`.
    pub fn shifted(&self, delta: &[i64]) -> Self {
        let moved: i64 = self.coeffs.iter().zip(delta).map(|(a, d)| a * d).sum();
        Self::new(self.coeffs.clone(), self.relation, self.constant - moved)
    }

    /// Integer complement as a disjunction of constraints.
    pub fn negations(&self) -> Vec<LinearConstraint> {
        let c = |rel, k| LinearConstraint::new(self.coeffs.clone(), rel, k);
        match self.relation {
            Relation::Ge => vec![c(Relation::Le, self.constant - 1)],
            Relation::Le => vec![c(Relation::Ge, self.constant + 1)],
            Relation::Eq => vec![
                c(Relation::Le, self.constant - 1),
                c(Relation::Ge, self.constant + 1),
            ],
        }
    }

    pub fn display<'a>(&'a self, p: &'a Protocol) -> ConstraintDisplay<'a> {
        ConstraintDisplay { c: self, p }
    }
}

pub struct ConstraintDisplay<'a> {
    c: &'a LinearConstraint,
    p: &'a Protocol,
}

impl fmt::Display for ConstraintDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, &a) in self.c.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let name = &self.p.states[q];
            let mag = a.abs();
            let sign = if a < 0 { "-" } else { "+" };
            if first {
                if a < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if mag == 1 {
                write!(f, "C({name})")?;
            } else {
                write!(f, "{mag}·C({name})")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " {} {}", self.c.relation, self.c.constant)
    }
}

/// Conjunction of linear constraints plus the implicit `C(q) >= 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintSet {
    dim: usize,
    constraints: Vec<LinearConstraint>,
}

impl ConstraintSet {
    pub fn new(dim: usize, constraints: Vec<LinearConstraint>) -> Self {
        debug_assert!(constraints.iter().all(|c| c.dim() == dim));
        ConstraintSet { dim, constraints }
    }

    /// No constraints beyond nonnegativity.
    pub fn universe(dim: usize) -> Self {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn with(&self, c: LinearConstraint) -> Self {
        let mut out = self.clone();
        out.constraints.push(c);
        out
    }

    pub fn and(&self, other: &ConstraintSet) -> Self {
        let mut out = self.clone();
        out.constraints.extend(other.constraints.iter().cloned());
        out
    }

    pub fn satisfies(&self, c: &Configuration) -> bool {
        self.constraints.iter().all(|k| k.holds(c))
    }

    fn problem(&self) -> Problem {
        let mut p = Problem::new(self.dim);
        for c in &self.constraints {
            p.push_int(&c.coeffs, c.relation, c.constant);
        }
        p
    }

    /// A rational point of the set, if one exists.
    pub fn feasible(&self) -> Option<Witness> {
        self.problem().feasible_point().map(Witness)
    }

    pub fn display<'a>(&'a self, p: &'a Protocol) -> SetDisplay<'a> {
        SetDisplay { s: self, p }
    }
}

pub struct SetDisplay<'a> {
    s: &'a ConstraintSet,
    p: &'a Protocol,
}

impl fmt::Display for SetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s.constraints.is_empty() {
            return f.write_str("true");
        }
        for (i, c) in self.s.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{}", c.display(self.p))?;
        }
        Ok(())
    }
}

/// Rational point found by the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness(pub Vec<Rational>);

impl Witness {
    /// The point as a configuration, when every coordinate is an integer.
    pub fn to_configuration(&self) -> Option<Configuration> {
        self.0
            .iter()
            .map(|v| {
                if v.is_integer() && !v.is_negative() {
                    v.to_integer().to_u64()
                } else {
                    None
                }
            })
            .collect::<Option<Vec<_>>>()
            .map(Configuration::new)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entailment {
    Proved,
    NotProved(Option<Witness>),
}

impl Entailment {
    pub fn is_proved(&self) -> bool {
        matches!(self, Entailment::Proved)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Entailment::NotProved(Some(w)) => Some(w),
            _ => None,
        }
    }
}

/// Does every integer point of `a` satisfy `c`?
pub fn entails_constraint(a: &ConstraintSet, c: &LinearConstraint) -> Entailment {
    for neg in c.negations() {
        if let Some(w) = a.with(neg).feasible() {
            return Entailment::NotProved(Some(w));
        }
    }
    Entailment::Proved
}

/// Does every integer point of `a` satisfy every constraint of `b`?
pub fn entails(a: &ConstraintSet, b: &ConstraintSet) -> Entailment {
    for c in &b.constraints {
        let e = entails_constraint(a, c);
        if !e.is_proved() {
            return e;
        }
    }
    Entailment::Proved
}

/// Constraints expressing that `t` is enabled.
pub fn enabling(dim: usize, t: &Transition) -> Vec<LinearConstraint> {
    t.requirements()
        .into_iter()
        .map(|(q, k)| LinearConstraint::sum(dim, &[q], Relation::Ge, k as i64))
        .collect()
}

fn with_enabling(s: &ConstraintSet, t: &Transition) -> ConstraintSet {
    let mut out = s.clone();
    out.constraints.extend(enabling(s.dim, t));
    out
}

/// `t` cannot fire at any configuration of `s`.
pub fn dead_in(s: &ConstraintSet, t: &Transition) -> bool {
    with_enabling(s, t).feasible().is_none()
}

/// Is `s` closed under firing `t`? A witness is a pre-configuration in `s`
/// enabling `t` whose successor may leave `s`.
pub fn inductive_under(s: &ConstraintSet, t: &Transition) -> Entailment {
    let guarded = with_enabling(s, t);
    for c in &s.constraints {
        let e = entails_constraint(&guarded, &c.shifted(t.displacement()));
        if !e.is_proved() {
            return e;
        }
    }
    Entailment::Proved
}

/// Inductivity under every transition of `p`; the first failure, if any.
pub fn inductive(s: &ConstraintSet, p: &Protocol) -> Result<(), (usize, Entailment)> {
    for (i, t) in p.transitions.iter().enumerate() {
        let e = inductive_under(s, t);
        if !e.is_proved() {
            return Err((i, e));
        }
    }
    Ok(())
}

/// A state weighting preserved by every transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Semiflow {
    pub weights: Vec<i64>,
}

/// Basis of `{ w : w . displacement(t) = 0 for all t }`, integer vectors with
/// gcd 1 and a positive first nonzero entry.
pub fn semiflow_basis(p: &Protocol) -> Vec<Semiflow> {
    let n = p.num_states();
    let mut m: Vec<Vec<Rational>> = p
        .transitions
        .iter()
        .map(|t| t.displacement().iter().map(|&d| rat(d)).collect())
        .collect();
    // Reduced row echelon form.
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(r) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, r);
        let lead = m[row][col].clone();
        for v in m[row].iter_mut() {
            *v = &*v / &lead;
        }
        let pivot_row = m[row].clone();
        for (k, other) in m.iter_mut().enumerate() {
            if k != row && !other[col].is_zero() {
                let f = other[col].clone();
                for (v, pv) in other.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            Semiflow {
                weights: integer_normalize(&v),
            }
        })
        .collect()
}

fn integer_normalize(v: &[Rational]) -> Vec<i64> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.iter()
        .map(|x| {
            (x / &g * &sign)
                .to_i64()
                .expect("semiflow weight fits in i64")
        })
        .collect()
}

/// States whose lower bound `sum C(q) >= 1` the root construction tries.
/// Protocols up to this many states get every subset; larger ones get
/// subsets of size at most two.
pub const FULL_TRAP_POOL_MAX_STATES: usize = 12;

fn trap_pool(n: usize) -> Vec<Vec<StateId>> {
    let max_size = if n <= FULL_TRAP_POOL_MAX_STATES { n } else { 2.min(n) };
    let mut pool = Vec::new();
    for size in 1..=max_size {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            pool.push(combo.clone());
            // Next combination in lexicographic order.
            let mut i = size;
            while i > 0 && combo[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for k in i..size {
                combo[k] = combo[k - 1] + 1;
            }
        }
    }
    pool
}

/// Initial configurations with predicate value `b`, as a union of convex
/// regions (an `=` predicate splits its negation in two).
pub fn initial_regions(p: &Protocol, b: bool) -> Vec<ConstraintSet> {
    let n = p.num_states();
    let mut base = ConstraintSet::universe(n);
    for q in 0..n {
        if !p.initial[q] {
            base.constraints
                .push(LinearConstraint::sum(n, &[q], Relation::Eq, 0));
        }
    }
    base.constraints
        .push(LinearConstraint::sum(n, &(0..n).collect::<Vec<_>>(), Relation::Ge, 1));
    predicate_cases(&p.predicate, b)
        .into_iter()
        .map(|c| base.with(c))
        .collect()
}

fn predicate_cases(pred: &Predicate, b: bool) -> Vec<LinearConstraint> {
    use crate::model::Comparison::*;
    let c = |rel, k| LinearConstraint::new(pred.coefficients.clone(), rel, k);
    let k = pred.constant;
    match (pred.comparison, b) {
        (Ge, true) => vec![c(Relation::Ge, k)],
        (Gt, true) => vec![c(Relation::Ge, k + 1)],
        (Eq, true) => vec![c(Relation::Eq, k)],
        (Ge, false) => vec![c(Relation::Le, k - 1)],
        (Gt, false) => vec![c(Relation::Le, k)],
        (Eq, false) => vec![c(Relation::Le, k - 1), c(Relation::Ge, k + 1)],
    }
}

fn floor(v: &Rational) -> i64 {
    v.floor().to_integer().to_i64().expect("bound fits in i64")
}

fn ceil(v: &Rational) -> i64 {
    v.ceil().to_integer().to_i64().expect("bound fits in i64")
}

/// An inductive over-approximation of the configurations reachable from
/// initial configurations with predicate value `b`.
///
/// Built from: at least one agent; for each semiflow the tightest bounds its
/// value takes over those initial configurations; then lower bounds
/// `sum_{q in Z} C(q) >= 1` that hold initially and are inductive relative to
/// everything gathered so far, repeated until nothing new is added.
pub fn root_abstraction(p: &Protocol, b: bool) -> ConstraintSet {
    let n = p.num_states();
    let all: Vec<StateId> = (0..n).collect();
    let regions: Vec<ConstraintSet> = initial_regions(p, b)
        .into_iter()
        .filter(|r| r.feasible().is_some())
        .collect();
    if regions.is_empty() {
        return ConstraintSet::new(n, vec![LinearConstraint::always_false(n)]);
    }
    let mut root = ConstraintSet::new(n, vec![LinearConstraint::sum(n, &all, Relation::Ge, 1)]);

    let add = |root: &mut ConstraintSet, c: LinearConstraint| {
        if !entails_constraint(root, &c).is_proved() {
            root.constraints.push(c);
        }
    };

    for s in semiflow_basis(p) {
        let obj: Vec<Rational> = s.weights.iter().map(|&w| rat(w)).collect();
        let mut lower: Option<i64> = Some(i64::MAX);
        let mut upper: Option<i64> = Some(i64::MIN);
        for r in &regions {
            let prob = r.problem();
            match prob.minimize(&obj) {
                LpOutcome::Optimal { value, .. } => {
                    lower = lower.map(|l| l.min(ceil(&value)));
                }
                LpOutcome::Unbounded => lower = None,
                LpOutcome::Infeasible => {}
            }
            match prob.maximize(&obj) {
                LpOutcome::Optimal { value, .. } => {
                    upper = upper.map(|u| u.max(floor(&value)));
                }
                LpOutcome::Unbounded => upper = None,
                LpOutcome::Infeasible => {}
            }
        }
        match (lower, upper) {
            (Some(l), Some(u)) if l == u => {
                add(&mut root, LinearConstraint::new(s.weights.clone(), Relation::Eq, l));
            }
            _ => {
                if let Some(l) = lower {
                    add(&mut root, LinearConstraint::new(s.weights.clone(), Relation::Ge, l));
                }
                if let Some(u) = upper {
                    add(&mut root, LinearConstraint::new(s.weights.clone(), Relation::Le, u));
                }
            }
        }
    }

    let pool = trap_pool(n);
    let mut changed = true;
    while changed {
        changed = false;
        for z in &pool {
            let trap = LinearConstraint::sum(n, z, Relation::Ge, 1);
            if entails_constraint(&root, &trap).is_proved() {
                continue;
            }
            if !regions
                .iter()
                .all(|r| entails_constraint(r, &trap).is_proved())
            {
                continue;
            }
            let candidate = root.with(trap.clone());
            let preserved = p.transitions.iter().all(|t| {
                entails_constraint(&with_enabling(&candidate, t), &trap.shifted(t.displacement()))
                    .is_proved()
            });
            if preserved {
                root = candidate;
                changed = true;
            }
        }
    }
    root
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{majority_voting, majority_voting_broken, parse_protocol};

    fn c(p: &Protocol, terms: &[(&str, i64)], rel: Relation, k: i64) -> LinearConstraint {
        let mut coeffs = vec![0; p.num_states()];
        for &(s, a) in terms {
            coeffs[p.state(s).unwrap()] += a;
        }
        LinearConstraint::new(coeffs, rel, k)
    }

    fn set(p: &Protocol, cs: Vec<LinearConstraint>) -> ConstraintSet {
        ConstraintSet::new(p.num_states(), cs)
    }

    #[test]
    fn satisfies_examples() {
        let p = majority_voting();
        let s4_member = p.config(&[("N", 1), ("n", 4), ("y", 2)]).unwrap();
        assert!(set(&p, vec![c(&p, &[("Y", 1)], Relation::Eq, 0)]).satisfies(&s4_member));
        let yn = p.config(&[("Y", 1), ("N", 1)]).unwrap();
        assert!(!set(&p, vec![c(&p, &[("Y", 1), ("N", -1)], Relation::Ge, 1)]).satisfies(&yn));
        let c45 = p.config(&[("Y", 4), ("N", 5)]).unwrap();
        assert!(set(&p, vec![c(&p, &[("N", 1), ("Y", -1)], Relation::Ge, 1)]).satisfies(&c45));
    }

    #[test]
    fn entailment_examples() {
        let p = majority_voting();
        let a = set(&p, vec![c(&p, &[("N", 1), ("Y", -1)], Relation::Ge, 1)]);
        let b = set(&p, vec![c(&p, &[("N", 1)], Relation::Ge, 1)]);
        assert_eq!(entails(&a, &b), Entailment::Proved);

        let a = set(&p, vec![c(&p, &[("Y", 1), ("y", 1)], Relation::Eq, 0)]);
        let b = set(
            &p,
            vec![
                c(&p, &[("Y", 1)], Relation::Eq, 0),
                c(&p, &[("y", 1)], Relation::Eq, 0),
            ],
        );
        assert_eq!(entails(&a, &b), Entailment::Proved);

        let a = set(&p, vec![c(&p, &[("y", 1)], Relation::Ge, 1)]);
        let b = set(&p, vec![c(&p, &[("y", 1)], Relation::Ge, 2)]);
        let e = entails(&a, &b);
        let w = e.witness().unwrap().to_configuration().unwrap();
        assert_eq!(w, p.config(&[("y", 1)]).unwrap());
    }

    #[test]
    fn dead_in_examples() {
        let p = majority_voting();
        let root = root_abstraction(&p, false);
        let s4 = root.with(c(&p, &[("Y", 1)], Relation::Eq, 0));
        let s5 = s4.with(c(&p, &[("y", 1)], Relation::Eq, 0));
        let t = |n| &p.transitions[p.transition(n).unwrap()];
        assert!(dead_in(&s4, t("a")));
        assert!(!dead_in(&s4, t("c")));
        assert!(dead_in(&s5, t("d")));
    }

    #[test]
    fn inductive_under_examples() {
        let p = majority_voting();
        let t = |n| &p.transitions[p.transition(n).unwrap()];
        let diff = set(&p, vec![c(&p, &[("N", 1), ("Y", -1)], Relation::Ge, 1)]);
        assert_eq!(inductive_under(&diff, t("a")), Entailment::Proved);
        let no_y = set(&p, vec![c(&p, &[("Y", 1)], Relation::Eq, 0)]);
        assert_eq!(inductive_under(&no_y, t("b")), Entailment::Proved);
        let few_y = set(&p, vec![c(&p, &[("y", 1)], Relation::Le, 1)]);
        let e = inductive_under(&few_y, t("d"));
        let pre = e.witness().unwrap().to_configuration().unwrap();
        assert_eq!(pre, p.config(&[("y", 1), ("n", 1)]).unwrap());
        assert!(!few_y.satisfies(&p.apply(&pre, p.transition("d").unwrap()).unwrap()));
    }

    #[test]
    fn majority_semiflows_span() {
        let p = majority_voting();
        let basis = semiflow_basis(&p);
        assert_eq!(basis.len(), 2);
        for s in &basis {
            for t in &p.transitions {
                let dot: i64 = s.weights.iter().zip(t.displacement()).map(|(a, b)| a * b).sum();
                assert_eq!(dot, 0);
            }
        }
        // Both expected vectors are rational combinations of the basis:
        // the 2x4 basis matrix stacked with either vector keeps rank 2.
        for target in [[1i64, 1, 1, 1], [1, -1, 0, 0]] {
            let rows: Vec<Vec<i64>> = basis
                .iter()
                .map(|s| s.weights.clone())
                .chain(std::iter::once(target.to_vec()))
                .collect();
            assert_eq!(rank(&rows), 2, "{target:?} not in span");
        }
    }

    fn rank(rows: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect())
            .collect();
        let cols = m[0].len();
        let mut rank = 0;
        for col in 0..cols {
            if let Some(r) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) {
                m.swap(rank, r);
                for k in 0..m.len() {
                    if k != rank && !m[k][col].is_zero() {
                        let f = &m[k][col] / &m[rank][col];
                        let pivot = m[rank].clone();
                        for (v, pv) in m[k].iter_mut().zip(&pivot) {
                            *v -= &f * pv;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn no_transitions_gives_unit_semiflows() {
        let p = parse_protocol(
            br#"{"name":"Idle","states":["p","q","r"],"initial":["p"],"output":{"p":1,"q":0,"r":1},
            "transitions":[],"predicate":{"coeffs":{},"op":">=","const":0}}"#,
        )
        .unwrap();
        let basis: Vec<Vec<i64>> = semiflow_basis(&p).into_iter().map(|s| s.weights).collect();
        assert_eq!(basis, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn majority_roots() {
        let p = majority_voting();
        let r1 = root_abstraction(&p, true);
        let want1 = set(
            &p,
            vec![
                c(&p, &[("Y", 1), ("N", -1)], Relation::Ge, 0),
                c(&p, &[("Y", 1), ("y", 1)], Relation::Ge, 1),
            ],
        );
        assert_eq!(entails(&r1, &want1), Entailment::Proved);
        let r0 = root_abstraction(&p, false);
        let want0 = set(&p, vec![c(&p, &[("N", 1), ("Y", -1)], Relation::Ge, 1)]);
        assert_eq!(entails(&r0, &want0), Entailment::Proved);
        for r in [&r0, &r1] {
            assert!(inductive(r, &p).is_ok());
        }
    }

    #[test]
    fn roots_cover_size_one_initials() {
        for p in [majority_voting(), majority_voting_broken()] {
            for b in [false, true] {
                let root = root_abstraction(&p, b);
                for c0 in p.initial_configurations(1) {
                    if p.eval_predicate(&c0).unwrap() == b {
                        assert!(root.satisfies(&c0));
                    }
                }
            }
        }
    }

    #[test]
    fn empty_initial_region_gives_false_root() {
        let p = parse_protocol(
            br#"{"name":"One","states":["q"],"initial":["q"],"output":{"q":1},
            "transitions":[],"predicate":{"coeffs":{},"op":">=","const":0}}"#,
        )
        .unwrap();
        let r0 = root_abstraction(&p, false);
        assert!(r0.feasible().is_none());
        let r1 = root_abstraction(&p, true);
        assert!(r1.satisfies(&p.config(&[("q", 1)]).unwrap()));
    }

    #[test]
    fn constraint_display() {
        let p = majority_voting();
        assert_eq!(
            c(&p, &[("Y", 1), ("N", -1)], Relation::Ge, 0).display(&p).to_string(),
            "C(Y) - C(N) >= 0"
        );
        assert_eq!(
            c(&p, &[("y", -2)], Relation::Le, 3).display(&p).to_string(),
            "-2·C(y) <= 3"
        );
    }

    #[test]
    fn trap_pool_order() {
        let pool = trap_pool(3);
        assert_eq!(
            pool,
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }
}
