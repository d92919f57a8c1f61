//! Population protocol semantics.
//!
//! A [`Protocol`] is a finite set of states with a subset of initial states,
//! a list of pairwise transitions, a boolean output per state and a linear
//! threshold predicate over initial configurations. A [`Configuration`]
//! counts the agents sitting in each state; every operation of the crate is
//! phrased in terms of configurations of one fixed protocol.
//!
//! The scheduler draws an ordered pair of distinct agents uniformly at random.
//! Transitions are symmetric in their two pre-states, so both orders of a pair
//! select the same transition. A drawn pair that matches no transition is a
//! *Null* interaction: it counts as a step and leaves the configuration as is.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("initial state `{0}` is not a declared state")]
    UnknownInitialState(String),
    #[error("no output declared for state `{0}`")]
    MissingOutput(String),
    #[error("output for state `{state}` must be 0 or 1, got {value}")]
    BadOutput { state: String, value: i64 },
    #[error("duplicate transition name `{0}`")]
    DuplicateTransition(String),
    #[error("transitions `{first}` and `{second}` share the pre-pair {{{pre}}}")]
    NondeterministicPair {
        first: String,
        second: String,
        pre: String,
    },
    #[error("predicate refers to non-initial state `{0}`")]
    PredicateOverNonInitial(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("configuration has {0} agents, at least 2 are needed to interact")]
    TooFewAgents(u64),
    #[error("state `{0}` is not initial but holds agents")]
    NotInitial(String),
    #[error("configuration has {got} entries, protocol has {expected} states")]
    ArityMismatch { expected: usize, got: usize },
}

/// Index of a state inside its protocol.
pub type StateId = usize;
/// Index of a transition inside its protocol.
pub type TransitionId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub pre: (StateId, StateId),
    pub post: (StateId, StateId),
    displacement: Vec<i64>,
}

impl Transition {
    /// Effect on the configuration, `post - pre`, one entry per state.
    pub fn displacement(&self) -> &[i64] {
        &self.displacement
    }

    /// Minimum number of agents required in each state to fire, as
    /// `(state, count)` pairs.
    pub fn requirements(&self) -> Vec<(StateId, u64)> {
        let (p, q) = self.pre;
        if p == q {
            vec![(p, 2)]
        } else {
            vec![(p, 1), (q, 1)]
        }
    }

    pub fn matches_pair(&self, a: StateId, b: StateId) -> bool {
        self.pre == (a, b) || self.pre == (b, a)
    }
}

/// Comparison used by threshold predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Ge => ">=",
            Comparison::Gt => ">",
            Comparison::Eq => "=",
        })
    }
}

/// `sum_q coeff[q] * C(q)  cmp  constant`, over initial states only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub coefficients: Vec<i64>,
    pub comparison: Comparison,
    pub constant: i64,
}

impl Predicate {
    pub fn holds(&self, counts: &[u64]) -> bool {
        let lhs: i128 = self
            .coefficients
            .iter()
            .zip(counts)
            .map(|(&a, &c)| a as i128 * c as i128)
            .sum();
        let rhs = self.constant as i128;
        match self.comparison {
            Comparison::Ge => lhs >= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Eq => lhs == rhs,
        }
    }
}

/// Agent counts per state, indexed by [`StateId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    counts: Vec<u64>,
}

impl Configuration {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn empty(num_states: usize) -> Self {
        Self {
            counts: vec![0; num_states],
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, q: StateId) -> u64 {
        self.counts[q]
    }

    pub fn size(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn occupied(&self) -> impl Iterator<Item = StateId> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(q, _)| q)
    }

    /// Adds `delta` to the counts; `None` when some count would go negative.
    pub fn shifted(&self, delta: &[i64]) -> Option<Configuration> {
        let counts = self
            .counts
            .iter()
            .zip(delta)
            .map(|(&c, &d)| {
                let v = c as i64 + d;
                (v >= 0).then_some(v as u64)
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Configuration { counts })
    }

    /// Weighted sum `sum_q w[q] * C(q)`.
    pub fn dot(&self, weights: &[i64]) -> i64 {
        self.counts
            .iter()
            .zip(weights)
            .map(|(&c, &w)| c as i64 * w)
            .sum()
    }

    /// Order used for "lexicographically least" choices: the agents are
    /// listed as a sorted sequence of state indices and sequences are compared
    /// element-wise, so `{Y}` precedes `{y}` when `Y` is declared first.
    pub fn agent_order(&self, other: &Configuration) -> std::cmp::Ordering {
        // Sorted agent sequences compare like the count vectors in reverse.
        other.counts.cmp(&self.counts)
    }

    pub fn display<'a>(&'a self, protocol: &'a Protocol) -> ConfigDisplay<'a> {
        ConfigDisplay {
            config: self,
            protocol,
        }
    }
}

pub struct ConfigDisplay<'a> {
    config: &'a Configuration,
    protocol: &'a Protocol,
}

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for q in self.config.occupied() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            let c = self.config.get(q);
            let name = &self.protocol.states[q];
            if c == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{c}·{name}")?;
            }
        }
        f.write_str("}")
    }
}

/// Output consensus of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Consensus {
    Zero,
    One,
    None,
}

impl Consensus {
    pub fn of_output(b: bool) -> Self {
        if b {
            Consensus::One
        } else {
            Consensus::Zero
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Consensus::Zero => Some(false),
            Consensus::One => Some(true),
            Consensus::None => None,
        }
    }
}

/// Outcome of one scheduler draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub agents: (StateId, StateId),
    pub transition: Option<TransitionId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    pub name: String,
    pub description: Option<String>,
    pub states: Vec<String>,
    pub initial: Vec<bool>,
    pub output: Vec<bool>,
    pub transitions: Vec<Transition>,
    pub predicate: Predicate,
    state_index: HashMap<String, StateId>,
    pair_index: HashMap<(StateId, StateId), TransitionId>,
}

/// Unvalidated protocol parts, keyed by state name.
#[derive(Debug, Clone, Default)]
pub struct ProtocolSpec {
    pub name: String,
    pub description: Option<String>,
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub output: BTreeMap<String, i64>,
    /// `(name, [pre1, pre2], [post1, post2])`
    pub transitions: Vec<(String, [String; 2], [String; 2])>,
    pub predicate_coeffs: BTreeMap<String, i64>,
    pub predicate_cmp: Option<Comparison>,
    pub predicate_const: i64,
}

fn ordered(a: StateId, b: StateId) -> (StateId, StateId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Protocol {
    pub fn from_spec(spec: ProtocolSpec) -> Result<Self, ModelError> {
        let mut state_index = HashMap::new();
        for (i, s) in spec.states.iter().enumerate() {
            if state_index.insert(s.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(s.clone()));
            }
        }
        let n = spec.states.len();
        let lookup = |s: &str| {
            state_index
                .get(s)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(s.to_string()))
        };

        let mut initial = vec![false; n];
        for s in &spec.initial {
            let q = state_index
                .get(s)
                .copied()
                .ok_or_else(|| ModelError::UnknownInitialState(s.clone()))?;
            initial[q] = true;
        }

        for s in spec.output.keys() {
            lookup(s)?;
        }
        let mut output = vec![false; n];
        for (q, s) in spec.states.iter().enumerate() {
            match spec.output.get(s) {
                None => return Err(ModelError::MissingOutput(s.clone())),
                Some(0) => output[q] = false,
                Some(1) => output[q] = true,
                Some(&v) => {
                    return Err(ModelError::BadOutput {
                        state: s.clone(),
                        value: v,
                    })
                }
            }
        }

        let mut transitions = Vec::with_capacity(spec.transitions.len());
        let mut names = HashMap::new();
        let mut pair_index: HashMap<(StateId, StateId), TransitionId> = HashMap::new();
        for (name, pre, post) in &spec.transitions {
            if names.insert(name.clone(), transitions.len()).is_some() {
                return Err(ModelError::DuplicateTransition(name.clone()));
            }
            let pre = (lookup(&pre[0])?, lookup(&pre[1])?);
            let post = (lookup(&post[0])?, lookup(&post[1])?);
            let key = ordered(pre.0, pre.1);
            if let Some(&other) = pair_index.get(&key) {
                let other: &Transition = &transitions[other];
                return Err(ModelError::NondeterministicPair {
                    first: other.name.clone(),
                    second: name.clone(),
                    pre: format!("{}, {}", spec.states[key.0], spec.states[key.1]),
                });
            }
            let mut displacement = vec![0i64; n];
            displacement[pre.0] -= 1;
            displacement[pre.1] -= 1;
            displacement[post.0] += 1;
            displacement[post.1] += 1;
            pair_index.insert(key, transitions.len());
            transitions.push(Transition {
                name: name.clone(),
                pre,
                post,
                displacement,
            });
        }

        let mut coefficients = vec![0i64; n];
        for (s, &c) in &spec.predicate_coeffs {
            let q = lookup(s)?;
            if !initial[q] {
                return Err(ModelError::PredicateOverNonInitial(s.clone()));
            }
            coefficients[q] = c;
        }
        let predicate = Predicate {
            coefficients,
            comparison: spec.predicate_cmp.unwrap_or(Comparison::Ge),
            constant: spec.predicate_const,
        };

        Ok(Protocol {
            name: spec.name,
            description: spec.description,
            states: spec.states,
            initial,
            output,
            transitions,
            predicate,
            state_index,
            pair_index,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, name: &str) -> Result<StateId, ModelError> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn transition(&self, name: &str) -> Result<TransitionId, ModelError> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| ModelError::UnknownTransition(name.to_string()))
    }

    pub fn initial_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states()).filter(|&q| self.initial[q])
    }

    /// Transition fired by an interaction between agents in `a` and `b`.
    pub fn transition_for_pair(&self, a: StateId, b: StateId) -> Option<TransitionId> {
        self.pair_index.get(&ordered(a, b)).copied()
    }

    /// Builds a configuration from `(state name, count)` pairs.
    pub fn config(&self, entries: &[(&str, u64)]) -> Result<Configuration, ModelError> {
        let mut counts = vec![0; self.num_states()];
        for &(s, c) in entries {
            counts[self.state(s)?] += c;
        }
        Ok(Configuration::new(counts))
    }

    pub fn config_from_map<'a, I>(&self, entries: I) -> Result<Configuration, ModelError>
    where
        I: IntoIterator<Item = (&'a String, &'a u64)>,
    {
        let mut counts = vec![0; self.num_states()];
        for (s, &c) in entries {
            counts[self.state(s)?] += c;
        }
        Ok(Configuration::new(counts))
    }

    pub fn config_to_map(&self, c: &Configuration) -> BTreeMap<String, u64> {
        c.occupied()
            .map(|q| (self.states[q].clone(), c.get(q)))
            .collect()
    }

    fn check_arity(&self, c: &Configuration) -> Result<(), ModelError> {
        if c.counts.len() != self.num_states() {
            return Err(ModelError::ArityMismatch {
                expected: self.num_states(),
                got: c.counts.len(),
            });
        }
        Ok(())
    }

    pub fn enabled(&self, c: &Configuration, t: TransitionId) -> Result<bool, ModelError> {
        let tr = self
            .transitions
            .get(t)
            .ok_or_else(|| ModelError::UnknownTransition(format!("#{t}")))?;
        self.check_arity(c)?;
        Ok(tr.requirements().iter().all(|&(q, k)| c.get(q) >= k))
    }

    pub fn apply(&self, c: &Configuration, t: TransitionId) -> Result<Configuration, ModelError> {
        if !self.enabled(c, t)? {
            return Err(ModelError::NotEnabled(self.transitions[t].name.clone()));
        }
        Ok(c
            .shifted(self.transitions[t].displacement())
            .expect("enabled transition keeps counts nonnegative"))
    }

    /// Enabled transitions with their results, in declaration order.
    pub fn successors(&self, c: &Configuration) -> Vec<(TransitionId, Configuration)> {
        (0..self.transitions.len())
            .filter(|&t| self.enabled(c, t).unwrap_or(false))
            .map(|t| {
                let next = c
                    .shifted(self.transitions[t].displacement())
                    .expect("enabled transition keeps counts nonnegative");
                (t, next)
            })
            .collect()
    }

    pub fn consensus(&self, c: &Configuration) -> Result<Consensus, ModelError> {
        self.check_arity(c)?;
        let mut seen = [false; 2];
        let mut any = false;
        for q in c.occupied() {
            any = true;
            seen[self.output[q] as usize] = true;
        }
        if !any {
            return Err(ModelError::EmptyConfiguration);
        }
        Ok(match seen {
            [true, false] => Consensus::Zero,
            [false, true] => Consensus::One,
            _ => Consensus::None,
        })
    }

    pub fn is_initial_config(&self, c: &Configuration) -> bool {
        c.occupied().all(|q| self.initial[q])
    }

    pub fn eval_predicate(&self, c: &Configuration) -> Result<bool, ModelError> {
        self.check_arity(c)?;
        if let Some(q) = c.occupied().find(|&q| !self.initial[q]) {
            return Err(ModelError::NotInitial(self.states[q].clone()));
        }
        Ok(self.predicate.holds(c.counts()))
    }

    /// Draws an ordered pair of distinct agents uniformly from the
    /// `n(n-1)` possibilities and attaches the matching transition, if any.
    pub fn sample_interaction<R: Rng + ?Sized>(
        &self,
        c: &Configuration,
        rng: &mut R,
    ) -> Result<Interaction, ModelError> {
        self.check_arity(c)?;
        let n = c.size();
        if n < 2 {
            return Err(ModelError::TooFewAgents(n));
        }
        let first = rng.gen_range(0..n);
        let mut second = rng.gen_range(0..n - 1);
        if second >= first {
            second += 1;
        }
        let a = self.agent_state(c, first);
        let b = self.agent_state(c, second);
        Ok(Interaction {
            agents: (a, b),
            transition: self.transition_for_pair(a, b),
        })
    }

    /// State of the `k`-th agent when agents are listed state by state.
    fn agent_state(&self, c: &Configuration, mut k: u64) -> StateId {
        for (q, &cnt) in c.counts.iter().enumerate() {
            if k < cnt {
                return q;
            }
            k -= cnt;
        }
        unreachable!("agent index out of range")
    }

    /// Performs one scheduler step. Null interactions return the input.
    pub fn random_step<R: Rng + ?Sized>(
        &self,
        c: &Configuration,
        rng: &mut R,
    ) -> Result<(Interaction, Configuration), ModelError> {
        let i = self.sample_interaction(c, rng)?;
        let next = match i.transition {
            Some(t) => self.apply(c, t)?,
            None => c.clone(),
        };
        Ok((i, next))
    }

    /// All configurations of exactly `size` agents whose support lies in
    /// `allowed`, in agent order (see [`Configuration::agent_order`]).
    pub fn configurations_of_size(&self, size: u64, allowed: &[bool]) -> Vec<Configuration> {
        let slots: Vec<StateId> = (0..self.num_states()).filter(|&q| allowed[q]).collect();
        let mut out = Vec::new();
        let mut counts = vec![0u64; self.num_states()];
        fill(&slots, 0, size, &mut counts, &mut out);
        out
    }

    pub fn initial_configurations(&self, size: u64) -> Vec<Configuration> {
        self.configurations_of_size(size, &self.initial)
    }

    pub fn all_configurations(&self, size: u64) -> Vec<Configuration> {
        self.configurations_of_size(size, &vec![true; self.num_states()])
    }
}

// Largest count in the earliest slot first, which is agent order.
fn fill(slots: &[StateId], i: usize, left: u64, counts: &mut Vec<u64>, out: &mut Vec<Configuration>) {
    if i + 1 == slots.len() {
        counts[slots[i]] = left;
        out.push(Configuration::new(counts.clone()));
        counts[slots[i]] = 0;
        return;
    }
    if slots.is_empty() {
        if left == 0 {
            out.push(Configuration::new(counts.clone()));
        }
        return;
    }
    for k in (0..=left).rev() {
        counts[slots[i]] = k;
        fill(slots, i + 1, left - k, counts, out);
    }
    counts[slots[i]] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::majority_voting;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enabled_examples() {
        let p = majority_voting();
        let a = p.transition("a").unwrap();
        let c = p.transition("c").unwrap();
        let d = p.transition("d").unwrap();
        assert!(p.enabled(&p.config(&[("Y", 1), ("N", 1)]).unwrap(), a).unwrap());
        assert!(!p.enabled(&p.config(&[("y", 2)]).unwrap(), d).unwrap());
        let s4_member = p.config(&[("N", 1), ("n", 4), ("y", 2)]).unwrap();
        assert!(p.enabled(&s4_member, c).unwrap());
        assert_eq!(
            p.enabled(&s4_member, 17),
            Err(ModelError::UnknownTransition("#17".into()))
        );
    }

    #[test]
    fn apply_examples() {
        let p = majority_voting();
        let yn = p.config(&[("Y", 1), ("N", 1)]).unwrap();
        let a = p.transition("a").unwrap();
        let b = p.transition("b").unwrap();
        assert_eq!(p.apply(&yn, a).unwrap(), p.config(&[("y", 1), ("n", 1)]).unwrap());
        let y_n = p.config(&[("Y", 1), ("n", 1)]).unwrap();
        assert_eq!(p.apply(&y_n, b).unwrap(), p.config(&[("Y", 1), ("y", 1)]).unwrap());
        assert_eq!(p.apply(&yn, b), Err(ModelError::NotEnabled("b".into())));
    }

    #[test]
    fn successor_examples() {
        let p = majority_voting();
        let d = p.transition("d").unwrap();
        let a = p.transition("a").unwrap();
        assert_eq!(
            p.successors(&p.config(&[("y", 1), ("n", 1)]).unwrap()),
            vec![(d, p.config(&[("y", 2)]).unwrap())]
        );
        assert!(p.successors(&p.config(&[("y", 2)]).unwrap()).is_empty());
        assert_eq!(
            p.successors(&p.config(&[("Y", 1), ("N", 1)]).unwrap()),
            vec![(a, p.config(&[("y", 1), ("n", 1)]).unwrap())]
        );
    }

    #[test]
    fn consensus_examples() {
        let p = majority_voting();
        let c = |e: &[(&str, u64)]| p.consensus(&p.config(e).unwrap()).unwrap();
        assert_eq!(c(&[("y", 1), ("n", 1)]), Consensus::None);
        assert_eq!(c(&[("y", 2), ("Y", 1)]), Consensus::One);
        assert_eq!(c(&[("N", 1), ("n", 4), ("y", 2)]), Consensus::None);
        assert_eq!(c(&[("N", 3), ("n", 1)]), Consensus::Zero);
        assert_eq!(
            p.consensus(&Configuration::empty(4)),
            Err(ModelError::EmptyConfiguration)
        );
    }

    #[test]
    fn predicate_examples() {
        let p = majority_voting();
        let e = |c: &[(&str, u64)]| p.eval_predicate(&p.config(c).unwrap());
        assert_eq!(e(&[("Y", 1), ("N", 1)]), Ok(true));
        assert_eq!(e(&[("Y", 4), ("N", 5)]), Ok(false));
        assert_eq!(e(&[("Y", 1)]), Ok(true));
        assert_eq!(e(&[("Y", 1), ("y", 1)]), Err(ModelError::NotInitial("y".into())));
    }

    #[test]
    fn sample_interaction_edge_cases() {
        let p = majority_voting();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = p.transition("a").unwrap();
        let yn = p.config(&[("Y", 1), ("N", 1)]).unwrap();
        let yy = p.config(&[("y", 2)]).unwrap();
        for _ in 0..100 {
            assert_eq!(p.sample_interaction(&yn, &mut rng).unwrap().transition, Some(a));
            assert_eq!(p.sample_interaction(&yy, &mut rng).unwrap().transition, None);
        }
        assert_eq!(
            p.sample_interaction(&p.config(&[("Y", 1)]).unwrap(), &mut rng),
            Err(ModelError::TooFewAgents(1))
        );
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let p = majority_voting();
        let c = p.config(&[("N", 1), ("n", 4), ("y", 2)]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| p.sample_interaction(&c, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn display_uses_multiset_notation() {
        let p = majority_voting();
        let c = p.config(&[("N", 1), ("n", 4), ("y", 2)]).unwrap();
        assert_eq!(c.display(&p).to_string(), "{N, 2·y, 4·n}");
    }

    #[test]
    fn enumeration_is_in_agent_order() {
        let p = majority_voting();
        let all = p.all_configurations(2);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], p.config(&[("Y", 2)]).unwrap());
        for w in all.windows(2) {
            assert_eq!(w[0].agent_order(&w[1]), std::cmp::Ordering::Less);
        }
        let init = p.initial_configurations(3);
        assert_eq!(init.len(), 4);
    }
}
