//! Ground truth for fixed population sizes.
//!
//! Agents are never created or destroyed, so the configurations reachable from
//! `C0` form a finite graph. Under the uniform scheduler every edge of that
//! graph carries strictly positive probability, which makes the run a finite
//! Markov chain. In a finite chain a run almost surely ends up inside a bottom
//! strongly connected component and then visits all of its configurations
//! infinitely often. So a run from `C0` stabilizes to consensus `b` with
//! probability 1 exactly when every bottom SCC reachable from `C0` consists of
//! configurations with consensus `b`. Everything in this module reduces to
//! that graph condition.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::model::{Configuration, Consensus, ModelError, Protocol, TransitionId};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
pub const DEFAULT_ORACLE_MAX_SIZE: u64 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("exploration exceeded the budget of {limit} configurations{}", at_size(.population))]
    Budget {
        limit: usize,
        population: Option<u64>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn at_size(p: &Option<u64>) -> String {
    p.map(|n| format!(" at population size {n}")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    pub node_budget: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Reachable configurations with transition-labelled edges. Node ids follow
/// breadth-first discovery order, which is deterministic.
#[derive(Debug, Clone)]
pub struct ReachGraph {
    pub nodes: Vec<Configuration>,
    pub succ: Vec<Vec<(TransitionId, usize)>>,
    pub roots: Vec<usize>,
    /// Breadth-first tree: how each non-root node was first reached.
    pub parent: Vec<Option<(usize, TransitionId)>>,
    /// Nodes that were not expanded (see [`explore_with`]).
    pub frozen: Vec<bool>,
    index: HashMap<Configuration, usize>,
}

impl ReachGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self, c: &Configuration) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, TransitionId, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, out)| out.iter().map(move |&(t, v)| (u, t, v)))
    }

    /// Path of the breadth-first tree from a root to `node`.
    pub fn path_to(&self, node: usize) -> Run {
        let mut configs = vec![self.nodes[node].clone()];
        let mut transitions = Vec::new();
        let mut cur = node;
        while let Some((prev, t)) = self.parent[cur] {
            configs.push(self.nodes[prev].clone());
            transitions.push(t);
            cur = prev;
        }
        configs.reverse();
        transitions.reverse();
        Run {
            configurations: configs,
            transitions,
        }
    }
}

/// A finite run `C0 -t1-> C1 -t2-> ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub configurations: Vec<Configuration>,
    pub transitions: Vec<TransitionId>,
}

impl Run {
    /// Replays the run step by step against the protocol semantics.
    pub fn is_valid(&self, p: &Protocol) -> bool {
        self.configurations.len() == self.transitions.len() + 1
            && self.transitions.iter().enumerate().all(|(i, &t)| {
                p.apply(&self.configurations[i], t).ok().as_ref() == Some(&self.configurations[i + 1])
            })
    }

    pub fn last(&self) -> &Configuration {
        self.configurations.last().expect("run is nonempty")
    }
}

pub fn explore(p: &Protocol, c0: &Configuration, opts: ExploreOptions) -> Result<ReachGraph, OracleError> {
    if c0.size() == 0 {
        return Err(ModelError::EmptyConfiguration.into());
    }
    explore_with(p, std::slice::from_ref(c0), opts, |_| true)
}

/// Breadth-first exploration from `roots`, expanding only nodes for which
/// `expand` holds; the others stay in the graph without successors and are
/// marked frozen.
pub fn explore_with<F>(
    p: &Protocol,
    roots: &[Configuration],
    opts: ExploreOptions,
    expand: F,
) -> Result<ReachGraph, OracleError>
where
    F: Fn(&Configuration) -> bool,
{
    let mut g = ReachGraph {
        nodes: Vec::new(),
        succ: Vec::new(),
        roots: Vec::new(),
        parent: Vec::new(),
        frozen: Vec::new(),
        index: HashMap::new(),
    };
    let mut queue = VecDeque::new();
    for r in roots {
        let id = match g.index.get(r) {
            Some(&id) => id,
            None => {
                let id = g.nodes.len();
                g.index.insert(r.clone(), id);
                g.nodes.push(r.clone());
                g.succ.push(Vec::new());
                g.parent.push(None);
                g.frozen.push(false);
                queue.push_back(id);
                id
            }
        };
        g.roots.push(id);
    }
    while let Some(u) = queue.pop_front() {
        if !expand(&g.nodes[u]) {
            g.frozen[u] = true;
            continue;
        }
        let current = g.nodes[u].clone();
        for (t, next) in p.successors(&current) {
            let v = match g.index.get(&next) {
                Some(&v) => v,
                None => {
                    if g.nodes.len() >= opts.node_budget {
                        return Err(OracleError::Budget {
                            limit: opts.node_budget,
                            population: Some(current.size()),
                        });
                    }
                    let v = g.nodes.len();
                    g.index.insert(next.clone(), v);
                    g.nodes.push(next);
                    g.succ.push(Vec::new());
                    g.parent.push(Some((u, t)));
                    g.frozen.push(false);
                    queue.push_back(v);
                    v
                }
            };
            g.succ[u].push((t, v));
        }
    }
    Ok(g)
}

/// Strongly connected components (iterative Tarjan), in reverse topological
/// order of the condensation.
pub fn sccs(g: &ReachGraph) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = g.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for start in 0..n {
        if index[start] != UNSEEN {
            continue;
        }
        // (node, next successor position)
        let mut call = vec![(start, 0usize)];
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (u, ref mut pos)) = call.last_mut() {
            if let Some(&(_, v)) = g.succ[u].get(*pos) {
                *pos += 1;
                if index[v] == UNSEEN {
                    index[v] = counter;
                    low[v] = counter;
                    counter += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    call.push((v, 0));
                } else if on_stack[v] {
                    low[u] = low[u].min(index[v]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[u]);
                }
                if low[u] == index[u] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == u {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// SCCs without edges leaving them, sorted by smallest node id.
pub fn bottom_sccs(g: &ReachGraph) -> Vec<Vec<usize>> {
    let comps = sccs(g);
    let mut comp_of = vec![0; g.len()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let mut bottom: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(i, c)| {
            c.iter()
                .all(|&u| g.succ[u].iter().all(|&(_, v)| comp_of[v] == *i))
        })
        .map(|(_, c)| c.clone())
        .collect();
    bottom.sort();
    bottom
}

/// Consensus shared by all nodes of a set, if any.
fn common_consensus(p: &Protocol, g: &ReachGraph, nodes: &[usize]) -> Result<Consensus, OracleError> {
    let mut common: Option<Consensus> = None;
    for &v in nodes {
        let c = p.consensus(&g.nodes[v])?;
        match common {
            None => common = Some(c),
            Some(prev) if prev != c => return Ok(Consensus::None),
            _ => {}
        }
    }
    Ok(common.unwrap_or(Consensus::None))
}

/// The consensus runs from `c0` stabilize to with probability 1, or
/// [`Consensus::None`] when no single value is almost sure.
pub fn stabilizes(p: &Protocol, c0: &Configuration, opts: ExploreOptions) -> Result<Consensus, OracleError> {
    let g = explore(p, c0, opts)?;
    let mut verdict: Option<Consensus> = None;
    for b in bottom_sccs(&g) {
        let c = common_consensus(p, &g, &b)?;
        if c == Consensus::None {
            return Ok(Consensus::None);
        }
        match verdict {
            None => verdict = Some(c),
            Some(prev) if prev != c => return Ok(Consensus::None),
            _ => {}
        }
    }
    Ok(verdict.unwrap_or(Consensus::None))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Predicate value of the initial configuration.
    pub expected: bool,
    /// From the initial configuration into a bottom SCC that does not have
    /// consensus `expected` throughout.
    pub run: Run,
    pub bottom_scc: Vec<Configuration>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    CorrectUpTo(u64),
    Counterexample(Counterexample),
}

/// Checks every initial configuration of size `1..=n_max`, in size then agent
/// order, and stops at the first one that does not stabilize to its predicate
/// value. The witness run is a shortest path into an offending bottom SCC.
pub fn verify_bounded(p: &Protocol, n_max: u64, opts: ExploreOptions) -> Result<Verdict, OracleError> {
    for size in 1..=n_max {
        for c0 in p.initial_configurations(size) {
            if let Some(cex) = check_initial(p, &c0, opts).map_err(|e| match e {
                OracleError::Budget { limit, .. } => OracleError::Budget {
                    limit,
                    population: Some(size),
                },
                other => other,
            })? {
                return Ok(Verdict::Counterexample(cex));
            }
        }
    }
    Ok(Verdict::CorrectUpTo(n_max))
}

fn check_initial(
    p: &Protocol,
    c0: &Configuration,
    opts: ExploreOptions,
) -> Result<Option<Counterexample>, OracleError> {
    let expected = p.eval_predicate(c0)?;
    let want = Consensus::of_output(expected);
    let g = explore(p, c0, opts)?;
    let bad: Vec<Vec<usize>> = bottom_sccs(&g)
        .into_iter()
        .filter(|b| {
            b.iter()
                .any(|&v| p.consensus(&g.nodes[v]).ok() != Some(want))
        })
        .collect();
    // Node ids are breadth-first order, so the smallest id is closest.
    let Some((target, scc)) = bad
        .iter()
        .flat_map(|b| b.iter().map(move |&v| (v, b)))
        .min_by_key(|&(v, _)| v)
    else {
        return Ok(None);
    };
    Ok(Some(Counterexample {
        expected,
        run: g.path_to(target),
        bottom_scc: scc.iter().map(|&v| g.nodes[v].clone()).collect(),
    }))
}
