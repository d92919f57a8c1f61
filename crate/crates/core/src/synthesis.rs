//! Automatic construction of the two stage graphs of a protocol.
//!
//! For each output `b` the synthesizer starts from the root abstraction and
//! grows a chain. At a stage that does not yet entail consensus `b` it tries
//! counting certificates `f_Z(C) = sum_{q in Z} C(q)`, smallest `Z` first and
//! lexicographic within a size, and accepts the first `Z` for which the child
//! `stage ∧ f_Z = 0` is inductive and strictly smaller and the certificate
//! passes [`check_certificate`]. When a chain cannot be completed, the bounded
//! oracle is asked for a counterexample run.

use std::time::Instant;

use crate::linear::{entails_constraint, inductive, ConstraintSet, LinearConstraint, Relation};
use crate::model::{Configuration, Protocol, StateId};
use crate::oracle::{
    verify_bounded, Counterexample, ExploreOptions, OracleError, Verdict, DEFAULT_ORACLE_MAX_SIZE,
};
use crate::speed::classify;
use crate::stage::{
    check_certificate, check_stage_graph, dead_transitions, eventually_dead_transitions, members,
    CheckReport, Certificate, Stage, StageError, StageGraph, DEFAULT_CERT_BOUND,
};

#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    /// Population bound for exhaustive certificate checks.
    pub cert_bound: u64,
    /// Largest population the oracle tries when looking for a counterexample.
    pub oracle_max_size: u64,
    pub explore: ExploreOptions,
    pub deadline: Option<Instant>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            cert_bound: DEFAULT_CERT_BOUND,
            oracle_max_size: DEFAULT_ORACLE_MAX_SIZE,
            explore: ExploreOptions::default(),
            deadline: None,
        }
    }
}

/// One of the two graphs, complete or not.
#[derive(Debug, Clone)]
pub struct GraphResult {
    pub graph: StageGraph,
    pub report: CheckReport,
    /// Every stage got a certificate or entails the consensus.
    pub complete: bool,
    /// Why the chain stopped early.
    pub failure: Option<String>,
}

impl GraphResult {
    pub fn is_verified(&self) -> bool {
        self.complete && self.report.is_proved()
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Verified,
    Refuted(Counterexample),
    Inconclusive(String),
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub outcome: Outcome,
    /// Graph for output 0, then output 1.
    pub graphs: [GraphResult; 2],
}

impl SynthesisResult {
    pub fn graph(&self, output: bool) -> &GraphResult {
        &self.graphs[output as usize]
    }

    pub fn is_verified(&self) -> bool {
        matches!(self.outcome, Outcome::Verified)
    }

    /// Finds a stage by id in either graph.
    pub fn stage(&self, id: &str) -> Option<(&StageGraph, usize)> {
        self.graphs
            .iter()
            .find_map(|g| g.graph.find(id).map(|i| (&g.graph, i)))
    }
}

/// Smallest, then agent-order least configuration of at most `max_size`
/// agents inside `s`.
pub fn stage_witness(p: &Protocol, s: &ConstraintSet, max_size: u64) -> Option<Configuration> {
    members(p, s, max_size).next()
}

/// Candidate certificate supports: all nonempty subsets by size then
/// lexicographically, or subsets of size at most two for large protocols.
fn candidate_supports(n: usize) -> Vec<Vec<StateId>> {
    let max = if n <= crate::linear::FULL_TRAP_POOL_MAX_STATES { n } else { 2.min(n) };
    let mut out = Vec::new();
    for size in 1..=max {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(combo.clone());
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
    out
}

fn consensus_constraint(p: &Protocol, b: bool) -> LinearConstraint {
    let wrong: Vec<StateId> = (0..p.num_states()).filter(|&q| p.output[q] != b).collect();
    LinearConstraint::sum(p.num_states(), &wrong, Relation::Eq, 0)
}

struct Chain {
    stages: Vec<Stage>,
    complete: bool,
    failure: Option<String>,
}

fn build_chain(p: &Protocol, b: bool, opts: &SynthesisOptions) -> Result<Chain, StageError> {
    let consensus = consensus_constraint(p, b);
    let cap = p.num_states() + 1;
    let supports = candidate_supports(p.num_states());
    let mut stages = vec![Stage::new("", crate::linear::root_abstraction(p, b))];
    loop {
        let current = stages.last().expect("chain is nonempty").constraint.clone();
        if entails_constraint(&current, &consensus).is_proved() {
            return Ok(Chain {
                stages,
                complete: true,
                failure: None,
            });
        }
        if stages.len() >= cap {
            return Ok(Chain {
                stages,
                complete: false,
                failure: Some(format!("chain length cap {cap} reached")),
            });
        }
        let mut accepted = None;
        for z in &supports {
            if opts.deadline.is_some_and(|d| Instant::now() > d) {
                return Ok(Chain {
                    stages,
                    complete: false,
                    failure: Some("time budget exceeded".into()),
                });
            }
            let f = Certificate::counting(p.num_states(), z);
            let child = Stage::new("", current.with(f.zero_constraint()));
            if inductive(&child.constraint, p).is_err() {
                continue;
            }
            let strict = members(p, &current, opts.cert_bound).any(|c| f.value(&c) > 0);
            if !strict {
                continue;
            }
            let mut parent = Stage::new("", current.clone());
            parent.certificate = Some(f.clone());
            if check_certificate(p, &parent, &[&child], opts.cert_bound, opts.explore)?.is_proved() {
                accepted = Some((f, child));
                break;
            }
        }
        match accepted {
            Some((f, child)) => {
                stages.last_mut().expect("chain is nonempty").certificate = Some(f);
                stages.push(child);
            }
            None => {
                let depth = stages.len() - 1;
                return Ok(Chain {
                    stages,
                    complete: false,
                    failure: Some(format!(
                        "no counting certificate found for the stage at depth {depth}"
                    )),
                });
            }
        }
    }
}

/// Fills in dead sets, speeds and example configurations.
fn annotate(p: &Protocol, stages: &mut [Stage], bound: u64) {
    for s in stages.iter_mut() {
        s.dead = dead_transitions(p, &s.constraint);
    }
    for i in 0..stages.len() {
        let child = stages.get(i + 1).cloned();
        let s = &stages[i];
        let witness = match &child {
            Some(ch) => members(p, &s.constraint, bound)
                .find(|c| !ch.constraint.satisfies(c))
                .or_else(|| stage_witness(p, &s.constraint, bound)),
            None => stage_witness(p, &s.constraint, bound),
        };
        let (eventually_dead, speed) = match (&child, &s.certificate) {
            (Some(ch), Some(f)) => (
                eventually_dead_transitions(p, s, &[ch]).expect("stage has a child"),
                Some(classify(p, f, &s.dead)),
            ),
            _ => (Vec::new(), None),
        };
        let s = &mut stages[i];
        s.witness = witness;
        s.eventually_dead = eventually_dead;
        s.speed = speed;
    }
}

/// Stage ids: `S0` and `S1` are the roots for outputs 0 and 1; the remaining
/// stages are numbered from `S2` on, first along the output-1 chain, then
/// along the output-0 chain.
fn assign_ids(chains: &mut [Chain; 2]) {
    chains[0].stages[0].id = "S0".into();
    chains[1].stages[0].id = "S1".into();
    let mut next = 2;
    for b in [1, 0] {
        for s in chains[b].stages.iter_mut().skip(1) {
            s.id = format!("S{next}");
            next += 1;
        }
    }
}

fn into_graph(p: &Protocol, b: bool, mut chain: Chain, opts: &SynthesisOptions) -> Result<GraphResult, StageError> {
    if !chain.complete {
        // The last stage has no certificate; it becomes a leaf so that the
        // partial graph is still well formed.
        chain.stages.last_mut().expect("chain is nonempty").certificate = None;
    }
    annotate(p, &mut chain.stages, opts.cert_bound);
    let edges = (1..chain.stages.len()).map(|i| (i - 1, i)).collect();
    let graph = StageGraph::new(b, chain.stages, edges).expect("chains are well formed");
    let report = check_stage_graph(p, &graph, opts.cert_bound, opts.explore)?;
    Ok(GraphResult {
        graph,
        report,
        complete: chain.complete,
        failure: chain.failure,
    })
}

pub fn synthesize(p: &Protocol, opts: SynthesisOptions) -> Result<SynthesisResult, StageError> {
    let mut chains = [build_chain(p, false, &opts)?, build_chain(p, true, &opts)?];
    assign_ids(&mut chains);
    let [c0, c1] = chains;
    let graphs = [into_graph(p, false, c0, &opts)?, into_graph(p, true, c1, &opts)?];
    if graphs.iter().all(GraphResult::is_verified) {
        return Ok(SynthesisResult {
            outcome: Outcome::Verified,
            graphs,
        });
    }
    let reason = graphs
        .iter()
        .find_map(|g| {
            g.failure.clone().or_else(|| {
                g.report.first_failure().map(|o| {
                    format!(
                        "obligation {:?} failed for stage {}",
                        o.kind,
                        o.stage.as_deref().unwrap_or("?")
                    )
                })
            })
        })
        .unwrap_or_else(|| "stage graph incomplete".into());
    if opts.deadline.is_some_and(|d| Instant::now() > d) {
        return Ok(SynthesisResult {
            outcome: Outcome::Inconclusive(reason),
            graphs,
        });
    }
    let outcome = match verify_bounded(p, opts.oracle_max_size, opts.explore) {
        Ok(Verdict::Counterexample(cex)) => Outcome::Refuted(cex),
        Ok(Verdict::CorrectUpTo(n)) => Outcome::Inconclusive(format!(
            "{reason}; no counterexample with at most {n} agents"
        )),
        Err(OracleError::Budget { limit, population }) => Outcome::Inconclusive(format!(
            "{reason}; oracle budget of {limit} configurations exhausted{}",
            population.map(|n| format!(" at size {n}")).unwrap_or_default()
        )),
        Err(e) => return Err(e.into()),
    };
    Ok(SynthesisResult { outcome, graphs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{majority_voting, parse_protocol};

    #[test]
    fn supports_in_order() {
        let s = candidate_supports(2);
        assert_eq!(s, vec![vec![0], vec![1], vec![0, 1]]);
    }

    #[test]
    fn stage_witness_examples() {
        let p = majority_voting();
        let r1 = crate::linear::root_abstraction(&p, true);
        assert_eq!(stage_witness(&p, &r1, 7), Some(p.config(&[("Y", 1)]).unwrap()));
        let y = p.state("Y").unwrap();
        let unsat = ConstraintSet::new(
            4,
            vec![
                LinearConstraint::sum(4, &[y], Relation::Ge, 1),
                LinearConstraint::sum(4, &[y], Relation::Eq, 0),
            ],
        );
        assert_eq!(stage_witness(&p, &unsat, 7), None);
    }

    #[test]
    fn constant_protocol_is_verified() {
        let p = parse_protocol(
            br#"{"name":"Yes","states":["q"],"initial":["q"],"output":{"q":1},
            "transitions":[],"predicate":{"coeffs":{},"op":">=","const":0}}"#,
        )
        .unwrap();
        let r = synthesize(&p, SynthesisOptions::default()).unwrap();
        assert!(r.is_verified(), "{:?}", r.outcome);
        for g in &r.graphs {
            assert_eq!(g.graph.stages.len(), 1);
        }
    }
}
