//! Stages, stage graphs and the checker for them.
//!
//! A stage graph for output `b` proves that every initial configuration with
//! predicate value `b` almost surely stabilizes to consensus `b`. Each stage
//! is a set of configurations given by linear constraints. The checker
//! re-derives every obligation from the protocol alone, independently of how
//! the graph was produced:
//!
//! 1. the root contains the initial configurations with predicate `b`;
//! 2. every stage is inductive under every transition;
//! 3. every edge goes to a strictly smaller stage;
//! 4. terminal stages contain only consensus-`b` configurations;
//! 5. every certificate is valid (see [`check_certificate`]);
//! 6. declared dead and eventually dead transitions really are.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linear::{
    dead_in, entails, entails_constraint, enabling, inductive_under, ConstraintSet,
    Entailment, LinearConstraint, Relation,
};
use crate::model::{Configuration, Protocol, StateId, TransitionId};
use crate::oracle::{explore_with, ExploreOptions, OracleError};
use crate::speed::SpeedClass;

/// Default population bound for exhaustive certificate checks.
pub const DEFAULT_CERT_BOUND: u64 = 7;

/// Counting function `f(C) = sum_q weights[q] * C(q)` with nonnegative
/// weights, not all zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Certificate {
    weights: Vec<u64>,
}

impl Certificate {
    pub fn new(weights: Vec<u64>) -> Result<Self, String> {
        if weights.iter().all(|&w| w == 0) {
            return Err("certificate weights are all zero".into());
        }
        Ok(Certificate { weights })
    }

    /// `f = sum_{q in states} C(q)`.
    pub fn counting(dim: usize, states: &[StateId]) -> Self {
        let mut weights = vec![0; dim];
        for &q in states {
            weights[q] = 1;
        }
        Certificate::new(weights).expect("nonempty state set")
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn signed_weights(&self) -> Vec<i64> {
        self.weights.iter().map(|&w| w as i64).collect()
    }

    pub fn value(&self, c: &Configuration) -> u64 {
        self.weights.iter().zip(c.counts()).map(|(w, n)| w * n).sum()
    }

    /// Change of `f` caused by a displacement vector.
    pub fn delta(&self, displacement: &[i64]) -> i64 {
        self.weights
            .iter()
            .zip(displacement)
            .map(|(&w, &d)| w as i64 * d)
            .sum()
    }

    /// The constraint `f(C) = 0`.
    pub fn zero_constraint(&self) -> LinearConstraint {
        LinearConstraint::new(self.signed_weights(), Relation::Eq, 0)
    }

    pub fn display<'a>(&'a self, p: &'a Protocol) -> String {
        let terms: Vec<String> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(q, &w)| {
                if w == 1 {
                    format!("C({})", p.states[q])
                } else {
                    format!("{w}·C({})", p.states[q])
                }
            })
            .collect();
        terms.join(" + ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub id: String,
    pub constraint: ConstraintSet,
    /// Absent exactly for terminal stages.
    pub certificate: Option<Certificate>,
    pub dead: Vec<TransitionId>,
    pub eventually_dead: Vec<TransitionId>,
    pub speed: Option<SpeedClass>,
    pub witness: Option<Configuration>,
}

impl Stage {
    pub fn new(id: impl Into<String>, constraint: ConstraintSet) -> Self {
        Stage {
            id: id.into(),
            constraint,
            certificate: None,
            dead: Vec::new(),
            eventually_dead: Vec::new(),
            speed: None,
            witness: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("duplicate stage id `{0}`")]
    DuplicateId(String),
    #[error("edge refers to stage index {0} which does not exist")]
    EdgeOutOfRange(usize),
    #[error("stage `{0}` has an edge to itself")]
    SelfLoop(String),
    #[error("stage graph has a cycle")]
    Cycle,
    #[error("stage graph has several roots: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("stage graph has no root")]
    NoRoot,
    #[error("terminal stage `{0}` carries a certificate")]
    TerminalWithCertificate(String),
    #[error("non-terminal stage `{0}` has no certificate")]
    MissingCertificate(String),
    #[error("configuration lies in incomparable deepest stages {}", .0.join(", "))]
    AmbiguousPlacement(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageGraph {
    pub output: bool,
    pub stages: Vec<Stage>,
    /// `(parent, child)` index pairs.
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

impl StageGraph {
    pub fn new(
        output: bool,
        stages: Vec<Stage>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, StructureError> {
        let n = stages.len();
        let mut ids = BTreeSet::new();
        for s in &stages {
            if !ids.insert(s.id.as_str()) {
                return Err(StructureError::DuplicateId(s.id.clone()));
            }
        }
        let mut indegree = vec![0usize; n];
        let mut has_child = vec![false; n];
        for &(a, b) in &edges {
            for i in [a, b] {
                if i >= n {
                    return Err(StructureError::EdgeOutOfRange(i));
                }
            }
            if a == b {
                return Err(StructureError::SelfLoop(stages[a].id.clone()));
            }
            indegree[b] += 1;
            has_child[a] = true;
        }
        let roots: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        // Kahn's algorithm: every node is removed iff the graph is acyclic.
        let mut deg = indegree.clone();
        let mut queue: VecDeque<usize> = roots.iter().copied().collect();
        let mut removed = 0;
        while let Some(u) = queue.pop_front() {
            removed += 1;
            for &(a, b) in &edges {
                if a == u {
                    deg[b] -= 1;
                    if deg[b] == 0 {
                        queue.push_back(b);
                    }
                }
            }
        }
        if removed != n {
            return Err(StructureError::Cycle);
        }
        let root = match roots.as_slice() {
            [] => return Err(StructureError::NoRoot),
            [r] => *r,
            many => {
                return Err(StructureError::MultipleRoots(
                    many.iter().map(|&i| stages[i].id.clone()).collect(),
                ))
            }
        };
        for (i, s) in stages.iter().enumerate() {
            match (has_child[i], s.certificate.is_some()) {
                (false, true) => return Err(StructureError::TerminalWithCertificate(s.id.clone())),
                (true, false) => return Err(StructureError::MissingCertificate(s.id.clone())),
                _ => {}
            }
        }
        Ok(StageGraph {
            output,
            stages,
            edges,
            root,
        })
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.id == id)
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(a, _)| a == i)
            .map(|&(_, b)| b)
            .collect()
    }

    pub fn parents(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, b)| b == i)
            .map(|&(a, _)| a)
            .collect()
    }

    pub fn is_terminal(&self, i: usize) -> bool {
        self.children(i).is_empty()
    }

    /// All stages reachable from `i` by at least one edge.
    pub fn descendants(&self, i: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut todo = self.children(i);
        while let Some(u) = todo.pop() {
            if seen.insert(u) {
                todo.extend(self.children(u));
            }
        }
        seen
    }

    /// Stages on some path from the root to `i`, excluding `i`.
    pub fn ancestors(&self, i: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut todo = self.parents(i);
        while let Some(u) = todo.pop() {
            if seen.insert(u) {
                todo.extend(self.parents(u));
            }
        }
        seen
    }

    /// The unique deepest stage containing `c`, `None` outside the root.
    pub fn locate(&self, c: &Configuration) -> Result<Option<usize>, StructureError> {
        let inside: Vec<usize> = (0..self.stages.len())
            .filter(|&i| self.stages[i].constraint.satisfies(c))
            .collect();
        let deepest: Vec<usize> = inside
            .iter()
            .copied()
            .filter(|&i| self.children(i).iter().all(|ch| !inside.contains(ch)))
            .collect();
        match deepest.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(*one)),
            many => Err(StructureError::AmbiguousPlacement(
                many.iter().map(|&i| self.stages[i].id.clone()).collect(),
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StageError {
    #[error("stage `{0}` is terminal and has no certificate")]
    Terminal(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Configurations of size `1..=max_size` inside `s`, in size then agent order.
pub fn members<'a>(
    p: &'a Protocol,
    s: &'a ConstraintSet,
    max_size: u64,
) -> impl Iterator<Item = Configuration> + 'a {
    (1..=max_size).flat_map(move |n| {
        p.all_configurations(n)
            .into_iter()
            .filter(move |c| s.satisfies(c))
    })
}

pub fn dead_transitions(p: &Protocol, s: &ConstraintSet) -> Vec<TransitionId> {
    (0..p.transitions.len())
        .filter(|&t| dead_in(s, &p.transitions[t]))
        .collect()
}

/// Transitions dead in every child but alive in the stage itself.
pub fn eventually_dead_transitions(
    p: &Protocol,
    stage: &Stage,
    children: &[&Stage],
) -> Result<Vec<TransitionId>, StageError> {
    if children.is_empty() {
        return Err(StageError::Terminal(stage.id.clone()));
    }
    let here = dead_transitions(p, &stage.constraint);
    Ok((0..p.transitions.len())
        .filter(|t| !here.contains(t))
        .filter(|&t| children.iter().all(|c| dead_in(&c.constraint, &p.transitions[t])))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateStatus {
    /// Valid for every configuration up to `bound` agents; `symbolic` means
    /// the population-independent argument also went through, so the
    /// certificate is valid for all sizes.
    ProvedUpTo { bound: u64, symbolic: bool },
    /// From `start`, runs can get trapped at `stuck` without ever reaching
    /// a child or a smaller certificate value.
    Refuted {
        start: Configuration,
        stuck: Configuration,
    },
}

impl CertificateStatus {
    pub fn is_proved(&self) -> bool {
        matches!(self, CertificateStatus::ProvedUpTo { .. })
    }
}

/// Checks that from every configuration `C` of `stage` outside all children
/// (up to `bound` agents), runs almost surely reach a child or a configuration
/// with a smaller certificate value.
///
/// In the finite chain from `C`, targets are made absorbing; the condition
/// holds iff every bottom SCC reachable from `C` contains a target, i.e. every
/// configuration reachable without passing a target can still reach one.
pub fn check_certificate(
    p: &Protocol,
    stage: &Stage,
    children: &[&Stage],
    bound: u64,
    opts: ExploreOptions,
) -> Result<CertificateStatus, StageError> {
    let f = stage
        .certificate
        .as_ref()
        .ok_or_else(|| StageError::Terminal(stage.id.clone()))?;
    let in_child = |c: &Configuration| children.iter().any(|ch| ch.constraint.satisfies(c));
    for start in members(p, &stage.constraint, bound) {
        if in_child(&start) {
            continue;
        }
        let level = f.value(&start);
        let is_target = |c: &Configuration| f.value(c) < level || in_child(c);
        let g = explore_with(p, std::slice::from_ref(&start), opts, |c| !is_target(c))?;
        // Backward search from the targets.
        let mut preds = vec![Vec::new(); g.len()];
        for (u, _, v) in g.edges() {
            preds[v].push(u);
        }
        let mut good: Vec<bool> = g.frozen.clone();
        let mut todo: Vec<usize> = (0..g.len()).filter(|&v| good[v]).collect();
        while let Some(v) = todo.pop() {
            for &u in &preds[v] {
                if !good[u] {
                    good[u] = true;
                    todo.push(u);
                }
            }
        }
        if let Some(bad) = (0..g.len()).find(|&v| !good[v]) {
            // A configuration reachable from `bad` that cannot escape.
            let stuck = trapped_in(&g, bad);
            return Ok(CertificateStatus::Refuted {
                start,
                stuck: g.nodes[stuck].clone(),
            });
        }
    }
    Ok(CertificateStatus::ProvedUpTo {
        bound,
        symbolic: symbolic_certificate(p, stage, children),
    })
}

/// Follows successors from a node that cannot reach a target until a node
/// with no unseen successors; every node on the way is equally bad.
fn trapped_in(g: &crate::oracle::ReachGraph, from: usize) -> usize {
    let comps = crate::oracle::bottom_sccs(g);
    let mut seen = vec![false; g.len()];
    let mut todo = vec![from];
    seen[from] = true;
    while let Some(u) = todo.pop() {
        if let Some(c) = comps.iter().find(|c| c.contains(&u)) {
            return c[0];
        }
        for &(_, v) in &g.succ[u] {
            if !seen[v] {
                seen[v] = true;
                todo.push(v);
            }
        }
    }
    from
}

/// Largest number of relevant states for which the occupancy case split is
/// attempted.
const MAX_CASE_SPLIT_STATES: usize = 16;

/// Population-independent sufficient condition for certificate validity:
/// no live transition increases `f`, configurations of the stage with
/// `f = 0` lie in a child, and every configuration with `f > 0` enables some
/// `f`-decreasing transition. The last part is checked by splitting on which
/// relevant states are occupied.
pub fn symbolic_certificate(p: &Protocol, stage: &Stage, children: &[&Stage]) -> bool {
    let Some(f) = stage.certificate.as_ref() else {
        return false;
    };
    let s = &stage.constraint;
    let dim = p.num_states();
    let alive: Vec<TransitionId> = (0..p.transitions.len())
        .filter(|&t| !dead_in(s, &p.transitions[t]))
        .collect();
    if alive
        .iter()
        .any(|&t| f.delta(p.transitions[t].displacement()) > 0)
    {
        return false;
    }
    let at_zero = s.with(f.zero_constraint());
    if !children
        .iter()
        .any(|ch| entails(&at_zero, &ch.constraint).is_proved())
    {
        return false;
    }
    let decreasing: Vec<TransitionId> = alive
        .iter()
        .copied()
        .filter(|&t| f.delta(p.transitions[t].displacement()) < 0)
        .collect();
    let weighted: Vec<StateId> = (0..dim).filter(|&q| f.weights()[q] > 0).collect();
    let mut relevant: BTreeSet<StateId> = weighted.iter().copied().collect();
    for &t in &decreasing {
        let (a, b) = p.transitions[t].pre;
        relevant.insert(a);
        relevant.insert(b);
    }
    let relevant: Vec<StateId> = relevant.into_iter().collect();
    if relevant.len() > MAX_CASE_SPLIT_STATES {
        return false;
    }
    for mask in 0u32..(1 << relevant.len()) {
        let occupied = |q: StateId| {
            relevant
                .iter()
                .position(|&r| r == q)
                .is_some_and(|i| mask & (1 << i) != 0)
        };
        if !weighted.iter().any(|&q| occupied(q)) {
            continue;
        }
        let mut case = s.clone();
        for &q in &relevant {
            let rel = if occupied(q) {
                LinearConstraint::sum(dim, &[q], Relation::Ge, 1)
            } else {
                LinearConstraint::sum(dim, &[q], Relation::Eq, 0)
            };
            case = case.with(rel);
        }
        if case.feasible().is_none() {
            continue;
        }
        let some_enabled = decreasing.iter().any(|&t| {
            enabling(dim, &p.transitions[t])
                .iter()
                .all(|c| entails_constraint(&case, c).is_proved())
        });
        if !some_enabled {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObligationKind {
    RootCoverage,
    Inductive,
    StrictContainment,
    TerminalConsensus,
    Certificate,
    Dead,
    EventuallyDead,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObligationStatus {
    Proved,
    ProvedUpTo(u64),
    Refuted {
        witness: Configuration,
        detail: String,
    },
    NotProved {
        detail: String,
    },
}

impl ObligationStatus {
    pub fn is_proved(&self) -> bool {
        matches!(self, ObligationStatus::Proved | ObligationStatus::ProvedUpTo(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub kind: ObligationKind,
    pub stage: Option<String>,
    /// Child stage for containment obligations.
    pub other: Option<String>,
    pub transition: Option<String>,
    pub status: ObligationStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub output: bool,
    pub bound: u64,
    pub obligations: Vec<Obligation>,
}

impl CheckReport {
    pub fn is_proved(&self) -> bool {
        self.obligations.iter().all(|o| o.status.is_proved())
    }

    pub fn first_failure(&self) -> Option<&Obligation> {
        self.obligations.iter().find(|o| !o.status.is_proved())
    }

    pub fn failures(&self, kind: ObligationKind) -> impl Iterator<Item = &Obligation> {
        self.obligations
            .iter()
            .filter(move |o| o.kind == kind && !o.status.is_proved())
    }
}

fn not_proved(detail: impl Into<String>) -> ObligationStatus {
    ObligationStatus::NotProved {
        detail: detail.into(),
    }
}

/// Checks every obligation of `g`. Exhaustive parts go up to `bound` agents.
pub fn check_stage_graph(
    p: &Protocol,
    g: &StageGraph,
    bound: u64,
    opts: ExploreOptions,
) -> Result<CheckReport, StageError> {
    let mut out = Vec::new();
    let id = |i: usize| Some(g.stages[i].id.clone());
    let tname = |t: TransitionId| Some(p.transitions[t].name.clone());
    let root = &g.stages[g.root];

    // (1) root coverage
    let uncovered = (1..=bound)
        .flat_map(|n| p.initial_configurations(n))
        .find(|c| p.predicate.holds(c.counts()) == g.output && !root.constraint.satisfies(c));
    out.push(Obligation {
        kind: ObligationKind::RootCoverage,
        stage: id(g.root),
        other: None,
        transition: None,
        status: match uncovered {
            None => ObligationStatus::ProvedUpTo(bound),
            Some(c) => ObligationStatus::Refuted {
                detail: format!(
                    "initial configuration {} has predicate value {} but lies outside the root",
                    c.display(p),
                    g.output as u8
                ),
                witness: c,
            },
        },
    });

    // (2) inductivity
    for (i, s) in g.stages.iter().enumerate() {
        for (t, tr) in p.transitions.iter().enumerate() {
            let status = match inductive_under(&s.constraint, tr) {
                Entailment::Proved => ObligationStatus::Proved,
                Entailment::NotProved(w) => {
                    let leaves = |c: &Configuration| {
                        s.constraint.satisfies(c)
                            && p
                                .apply(c, t)
                                .is_ok_and(|next| !s.constraint.satisfies(&next))
                    };
                    let concrete = w
                        .and_then(|w| w.to_configuration())
                        .filter(|c| leaves(c))
                        .or_else(|| members(p, &s.constraint, bound).find(|c| leaves(c)));
                    match concrete {
                        Some(c) => ObligationStatus::Refuted {
                            detail: format!(
                                "{} -{}-> {} leaves the stage",
                                c.display(p),
                                tr.name,
                                p.apply(&c, t).expect("enabled").display(p)
                            ),
                            witness: c,
                        },
                        None => not_proved("inductivity not established by rational reasoning"),
                    }
                }
            };
            out.push(Obligation {
                kind: ObligationKind::Inductive,
                stage: id(i),
                other: None,
                transition: tname(t),
                status,
            });
        }
    }

    // (3) strict containment
    for &(a, b) in &g.edges {
        let parent = &g.stages[a].constraint;
        let child = &g.stages[b].constraint;
        let status = match entails(child, parent) {
            Entailment::Proved => match members(p, parent, bound).find(|c| !child.satisfies(c)) {
                Some(_) => ObligationStatus::Proved,
                None => not_proved(format!(
                    "no configuration with at most {bound} agents separates the stages"
                )),
            },
            Entailment::NotProved(w) => {
                let concrete = w
                    .and_then(|w| w.to_configuration())
                    .filter(|c| child.satisfies(c) && !parent.satisfies(c))
                    .or_else(|| members(p, child, bound).find(|c| !parent.satisfies(c)));
                match concrete {
                    Some(c) => ObligationStatus::Refuted {
                        detail: format!("{} is in the child but not in the parent", c.display(p)),
                        witness: c,
                    },
                    None => not_proved("containment not established by rational reasoning"),
                }
            }
        };
        out.push(Obligation {
            kind: ObligationKind::StrictContainment,
            stage: id(a),
            other: id(b),
            transition: None,
            status,
        });
    }

    // (4) terminal consensus
    let wrong: Vec<StateId> = (0..p.num_states())
        .filter(|&q| p.output[q] != g.output)
        .collect();
    for (i, s) in g.stages.iter().enumerate() {
        if !g.is_terminal(i) {
            continue;
        }
        let target = LinearConstraint::sum(p.num_states(), &wrong, Relation::Eq, 0);
        let status = if entails_constraint(&s.constraint, &target).is_proved() {
            ObligationStatus::Proved
        } else {
            match members(p, &s.constraint, bound).find(|c| !target.holds(c)) {
                Some(c) => ObligationStatus::Refuted {
                    detail: format!(
                        "{} lies in the terminal stage without consensus {}",
                        c.display(p),
                        g.output as u8
                    ),
                    witness: c,
                },
                None => not_proved("consensus not established by rational reasoning"),
            }
        };
        out.push(Obligation {
            kind: ObligationKind::TerminalConsensus,
            stage: id(i),
            other: None,
            transition: None,
            status,
        });
    }

    // (5) certificates
    for (i, s) in g.stages.iter().enumerate() {
        if g.is_terminal(i) {
            continue;
        }
        let kids: Vec<&Stage> = g.children(i).into_iter().map(|c| &g.stages[c]).collect();
        let status = match check_certificate(p, s, &kids, bound, opts)? {
            CertificateStatus::ProvedUpTo { symbolic: true, .. } => ObligationStatus::Proved,
            CertificateStatus::ProvedUpTo { bound, .. } => ObligationStatus::ProvedUpTo(bound),
            CertificateStatus::Refuted { start, stuck } => ObligationStatus::Refuted {
                detail: format!(
                    "from {} runs can get stuck at {} without reaching a child or decreasing {}",
                    start.display(p),
                    stuck.display(p),
                    s.certificate.as_ref().expect("non-terminal").display(p)
                ),
                witness: start,
            },
        };
        out.push(Obligation {
            kind: ObligationKind::Certificate,
            stage: id(i),
            other: None,
            transition: None,
            status,
        });
    }

    // (6) dead and eventually dead transitions
    for (i, s) in g.stages.iter().enumerate() {
        for &t in &s.dead {
            let status = if dead_in(&s.constraint, &p.transitions[t]) {
                ObligationStatus::Proved
            } else {
                match members(p, &s.constraint, bound).find(|c| p.enabled(c, t).unwrap_or(false)) {
                    Some(c) => ObligationStatus::Refuted {
                        detail: format!("{} enables {}", c.display(p), p.transitions[t].name),
                        witness: c,
                    },
                    None => not_proved("deadness not established by rational reasoning"),
                }
            };
            out.push(Obligation {
                kind: ObligationKind::Dead,
                stage: id(i),
                other: None,
                transition: tname(t),
                status,
            });
        }
        for &t in &s.eventually_dead {
            let kids = g.children(i);
            let live_child = kids
                .iter()
                .find(|&&c| !dead_in(&g.stages[c].constraint, &p.transitions[t]));
            let status = match live_child {
                None if !kids.is_empty() => ObligationStatus::Proved,
                None => not_proved("terminal stages have no eventually dead transitions"),
                Some(&c) => match members(p, &g.stages[c].constraint, bound)
                    .find(|cfg| p.enabled(cfg, t).unwrap_or(false))
                {
                    Some(cfg) => ObligationStatus::Refuted {
                        detail: format!(
                            "{} in child {} enables {}",
                            cfg.display(p),
                            g.stages[c].id,
                            p.transitions[t].name
                        ),
                        witness: cfg,
                    },
                    None => not_proved("deadness in child not established"),
                },
            };
            out.push(Obligation {
                kind: ObligationKind::EventuallyDead,
                stage: id(i),
                other: None,
                transition: tname(t),
                status,
            });
        }
    }

    Ok(CheckReport {
        output: g.output,
        bound,
        obligations: out,
    })
}
