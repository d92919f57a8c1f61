//! Helpers shared by the integration tests: hand-built Majority stage graphs
//! and oracles that do not go through the simplex solver.

#![allow(dead_code)]

use num::{BigRational, Signed, Zero};

use stagecraft::io::{majority_voting, majority_voting_broken};
use stagecraft::linear::{ConstraintSet, LinearConstraint, Relation};
use stagecraft::stage::{Certificate, Stage, StageGraph};
use stagecraft::{Configuration, Protocol};

pub fn majority() -> Protocol {
    majority_voting()
}

pub fn broken() -> Protocol {
    majority_voting_broken()
}

/// `sum coeffs[q] * C(q) rel k` with states given by name.
pub fn lin(p: &Protocol, terms: &[(&str, i64)], rel: Relation, k: i64) -> LinearConstraint {
    let mut coeffs = vec![0; p.num_states()];
    for (name, a) in terms {
        coeffs[p.state(name).unwrap()] += a;
    }
    LinearConstraint::new(coeffs, rel, k)
}

pub fn set(p: &Protocol, cs: Vec<LinearConstraint>) -> ConstraintSet {
    ConstraintSet::new(p.num_states(), cs)
}

pub fn cfg(p: &Protocol, entries: &[(&str, u64)]) -> Configuration {
    p.config(entries).unwrap()
}

pub fn tid(p: &Protocol, name: &str) -> usize {
    p.transition(name).unwrap()
}

pub fn tnames(p: &Protocol, ts: &[usize]) -> Vec<String> {
    ts.iter().map(|&t| p.transitions[t].name.clone()).collect()
}

/// The output-0 root written down by hand: more `N` than `Y` agents.
pub fn hand_root0(p: &Protocol) -> ConstraintSet {
    set(p, vec![lin(p, &[("N", 1), ("Y", -1)], Relation::Ge, 1)])
}

/// The output-1 root written down by hand: at least as many `Y` as `N`
/// agents, and some agent in `Y` or `y`.
pub fn hand_root1(p: &Protocol) -> ConstraintSet {
    set(
        p,
        vec![
            lin(p, &[("Y", 1), ("N", -1)], Relation::Ge, 0),
            lin(p, &[("Y", 1), ("y", 1)], Relation::Ge, 1),
        ],
    )
}

/// Chain `root -> root ∧ C(a)=0 -> root ∧ C(a)+C(b)=0` with certificates
/// `C(a)`, `C(b)`, built without the synthesizer.
pub fn hand_chain(p: &Protocol, output: bool, root: ConstraintSet, a: &str, b: &str, ids: [&str; 3]) -> StageGraph {
    let n = p.num_states();
    let qa = p.state(a).unwrap();
    let qb = p.state(b).unwrap();
    let mid = root.with(LinearConstraint::sum(n, &[qa], Relation::Eq, 0));
    let last = root.with(LinearConstraint::sum(n, &[qa, qb], Relation::Eq, 0));
    let mut s0 = Stage::new(ids[0], root);
    s0.certificate = Some(Certificate::counting(n, &[qa]));
    let mut s1 = Stage::new(ids[1], mid);
    s1.certificate = Some(Certificate::counting(n, &[qb]));
    let s2 = Stage::new(ids[2], last);
    StageGraph::new(output, vec![s0, s1, s2], vec![(0, 1), (1, 2)]).unwrap()
}

/// The output-0 graph S0 -> S4 -> S5 as drawn for Majority Voting.
pub fn hand_graph0(p: &Protocol) -> StageGraph {
    hand_chain(p, false, hand_root0(p), "Y", "y", ["S0", "S4", "S5"])
}

/// The output-1 graph S1 -> S2 -> S3 as drawn for Majority Voting.
pub fn hand_graph1(p: &Protocol) -> StageGraph {
    hand_chain(p, true, hand_root1(p), "N", "n", ["S1", "S2", "S3"])
}

/// Every configuration with `0 <= C(q) <= max` for all states.
pub fn box_configs(dim: usize, max: u64) -> Vec<Configuration> {
    let mut out = Vec::new();
    let mut counts = vec![0u64; dim];
    loop {
        out.push(Configuration::new(counts.clone()));
        let mut i = 0;
        loop {
            if i == dim {
                return out;
            }
            if counts[i] < max {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// Configurations of total size `1..=max_size`, by brute force over the box.
pub fn small_configs(dim: usize, max_size: u64) -> Vec<Configuration> {
    box_configs(dim, max_size)
        .into_iter()
        .filter(|c| (1..=max_size).contains(&c.size()))
        .collect()
}

type Q = BigRational;

fn q(v: i64) -> Q {
    Q::from_integer(v.into())
}

/// Rational feasibility of `{x >= 0} ∧ constraints` by Fourier–Motzkin
/// elimination. Exponential; meant for a handful of variables.
pub fn fm_feasible(dim: usize, constraints: &[LinearConstraint]) -> bool {
    // rows `a.x <= b`
    let mut rows: Vec<(Vec<Q>, Q)> = Vec::new();
    for c in constraints {
        let a: Vec<Q> = c.coeffs().iter().map(|&v| q(v)).collect();
        let b = q(c.constant());
        let neg = |a: &Vec<Q>| a.iter().map(|v| -v.clone()).collect::<Vec<_>>();
        match c.relation() {
            Relation::Le => rows.push((a, b)),
            Relation::Ge => rows.push((neg(&a), -b)),
            Relation::Eq => {
                rows.push((neg(&a), -b.clone()));
                rows.push((a, b));
            }
        }
    }
    for i in 0..dim {
        let mut a = vec![q(0); dim];
        a[i] = q(-1);
        rows.push((a, q(0)));
    }
    for var in 0..dim {
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.0[var].is_positive() {
                pos.push(r);
            } else if r.0[var].is_negative() {
                neg.push(r);
            } else {
                zero.push(r);
            }
        }
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let sp = ap[var].clone();
                let sn = -an[var].clone();
                let a: Vec<Q> = (0..dim).map(|k| &ap[k] * &sn + &an[k] * &sp).collect();
                let b = bp * &sn + bn * &sp;
                zero.push((a, b));
            }
        }
        rows = zero;
    }
    rows.iter().all(|(_, b)| !b.is_negative() || b.is_zero())
}
