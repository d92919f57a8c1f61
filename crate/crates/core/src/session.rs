//! Interactive simulation sessions.
//!
//! A session records a run and the fragment of the reachability graph it has
//! visited so far. Every visited configuration is placed into the deepest
//! stage of each stage graph that contains it. Stepping while the cursor is
//! not at the end of the run truncates the run after the cursor; visited
//! configurations and edges are kept.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Configuration, ModelError, Protocol, StateId, TransitionId};
use crate::stage::{StageGraph, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Placement(#[from] StructureError),
    #[error("no certificate: the current configuration lies in no non-terminal stage")]
    NoCertificate,
    #[error("pair ({0}, {1}) is not present in the current configuration")]
    PairNotPresent(String, String),
    #[error("index {index} is outside the run of length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("repeat must be positive")]
    ZeroRepeat,
    #[error("snapshot is inconsistent: {0}")]
    BadSnapshot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    /// The two agents in the given states interact.
    Manual(StateId, StateId),
    Random,
    /// Enabled transition minimizing the certificate of the current stage.
    Progress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepCommand {
    pub mode: StepMode,
    pub repeat: u32,
}

impl StepCommand {
    pub fn once(mode: StepMode) -> Self {
        StepCommand { mode, repeat: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainEdge {
    pub from: usize,
    pub transition: TransitionId,
    pub to: usize,
}

/// A progress step that could not lower or keep the certificate value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    /// Position in the run where it happened.
    pub run_index: usize,
    pub stage: String,
    pub message: String,
}

/// Result of [`Session::progress_to_child`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgressReport {
    pub steps: u64,
    pub reached: bool,
    /// `(graph output, stage id)` the walk started in.
    pub from: (bool, String),
    /// Stage of the same graph at the end.
    pub to: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Session {
    protocol: Arc<Protocol>,
    graphs: Arc<Vec<StageGraph>>,
    nodes: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    /// Stage index per graph for every node.
    placements: Vec<Vec<Option<usize>>>,
    edges: BTreeSet<ChainEdge>,
    run: Vec<usize>,
    cursor: usize,
    seed: u64,
    rng: ChaCha8Rng,
    anomalies: Vec<Anomaly>,
    warnings: Vec<String>,
}

impl Session {
    pub fn new(
        protocol: Arc<Protocol>,
        graphs: Arc<Vec<StageGraph>>,
        c0: Configuration,
        seed: u64,
    ) -> Result<Self, SessionError> {
        if c0.counts().len() != protocol.num_states() {
            return Err(ModelError::ArityMismatch {
                expected: protocol.num_states(),
                got: c0.counts().len(),
            }
            .into());
        }
        if c0.size() == 0 {
            return Err(ModelError::EmptyConfiguration.into());
        }
        let mut s = Session {
            protocol,
            graphs,
            nodes: Vec::new(),
            index: HashMap::new(),
            placements: Vec::new(),
            edges: BTreeSet::new(),
            run: Vec::new(),
            cursor: 0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            anomalies: Vec::new(),
            warnings: Vec::new(),
        };
        let id = s.intern(c0)?;
        if s.placements[id].iter().all(Option::is_none) {
            s.warnings
                .push("initial configuration lies outside both root stages".into());
        }
        s.run.push(id);
        Ok(s)
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn graphs(&self) -> &[StageGraph] {
        &self.graphs
    }

    pub fn nodes(&self) -> &[Configuration] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = &ChainEdge> {
        self.edges.iter()
    }

    pub fn run(&self) -> &[usize] {
        &self.run
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn anomalies(&self) -> &[Anomaly] {
        &self.anomalies
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Id of the configuration under the cursor.
    pub fn current_id(&self) -> usize {
        self.run[self.cursor]
    }

    pub fn current(&self) -> &Configuration {
        &self.nodes[self.current_id()]
    }

    /// Stage index of node `id` in graph `g`.
    pub fn placement(&self, id: usize, g: usize) -> Option<usize> {
        self.placements[id][g]
    }

    /// Stage id of node `id` in graph `g`.
    pub fn placement_id(&self, id: usize, g: usize) -> Option<&str> {
        self.placement(id, g)
            .map(|i| self.graphs[g].stages[i].id.as_str())
    }

    fn intern(&mut self, c: Configuration) -> Result<usize, SessionError> {
        if let Some(&id) = self.index.get(&c) {
            return Ok(id);
        }
        let placement = self
            .graphs
            .iter()
            .map(|g| g.locate(&c))
            .collect::<Result<Vec<_>, _>>()?;
        let id = self.nodes.len();
        self.index.insert(c.clone(), id);
        self.nodes.push(c);
        self.placements.push(placement);
        Ok(id)
    }

    /// Appends `next` after the cursor, truncating any forward history.
    fn advance(&mut self, transition: Option<TransitionId>, next: Configuration) -> Result<(), SessionError> {
        let from = self.current_id();
        let to = self.intern(next)?;
        if let Some(t) = transition {
            self.edges.insert(ChainEdge { from, transition: t, to });
        }
        self.run.truncate(self.cursor + 1);
        self.run.push(to);
        self.cursor += 1;
        Ok(())
    }

    /// First graph in which the current configuration sits in a non-terminal
    /// stage, with that stage.
    pub fn active_stage(&self) -> Option<(usize, usize)> {
        let id = self.current_id();
        (0..self.graphs.len()).find_map(|g| {
            self.placements[id][g]
                .filter(|&i| !self.graphs[g].is_terminal(i))
                .map(|i| (g, i))
        })
    }

    /// Certificate value of the current configuration in its active stage.
    pub fn certificate_value(&self) -> Option<u64> {
        let (g, i) = self.active_stage()?;
        let f = self.graphs[g].stages[i].certificate.as_ref()?;
        Some(f.value(self.current()))
    }

    pub fn step(&mut self, cmd: StepCommand) -> Result<(), SessionError> {
        if cmd.repeat == 0 {
            return Err(SessionError::ZeroRepeat);
        }
        for _ in 0..cmd.repeat {
            let moved = match cmd.mode {
                StepMode::Manual(a, b) => self.manual(a, b)?,
                StepMode::Random => self.random()?,
                StepMode::Progress => self.progress()?,
            };
            if !moved {
                break;
            }
        }
        Ok(())
    }

    fn manual(&mut self, a: StateId, b: StateId) -> Result<bool, SessionError> {
        let p = Arc::clone(&self.protocol);
        let c = self.current().clone();
        if a >= p.num_states() || b >= p.num_states() {
            return Err(ModelError::UnknownState(format!("#{}", a.max(b))).into());
        }
        let present = if a == b {
            c.get(a) >= 2
        } else {
            c.get(a) >= 1 && c.get(b) >= 1
        };
        if !present {
            return Err(SessionError::PairNotPresent(
                p.states[a].clone(),
                p.states[b].clone(),
            ));
        }
        match p.transition_for_pair(a, b) {
            Some(t) => {
                let next = p.apply(&c, t)?;
                self.advance(Some(t), next)?;
            }
            None => self.advance(None, c)?,
        }
        Ok(true)
    }

    fn random(&mut self) -> Result<bool, SessionError> {
        let p = Arc::clone(&self.protocol);
        let c = self.current().clone();
        let (i, next) = p.random_step(&c, &mut self.rng)?;
        self.advance(i.transition, next)?;
        Ok(true)
    }

    /// One progress step. Returns `false` when no transition is enabled.
    fn progress(&mut self) -> Result<bool, SessionError> {
        let (g, i) = self.active_stage().ok_or(SessionError::NoCertificate)?;
        let graphs = Arc::clone(&self.graphs);
        let stage = &graphs[g].stages[i];
        let f = stage.certificate.as_ref().ok_or(SessionError::NoCertificate)?;
        let c = self.current().clone();
        let now = f.value(&c);
        // successors come in declaration order; min_by_key keeps the first
        let best = self
            .protocol
            .successors(&c)
            .into_iter()
            .min_by_key(|(_, next)| f.value(next));
        match best {
            None => {
                self.anomalies.push(Anomaly {
                    run_index: self.cursor,
                    stage: stage.id.clone(),
                    message: "no transition is enabled".into(),
                });
                Ok(false)
            }
            Some((t, next)) => {
                let after = f.value(&next);
                if after > now {
                    self.anomalies.push(Anomaly {
                        run_index: self.cursor,
                        stage: stage.id.clone(),
                        message: format!(
                            "every enabled transition increases the certificate; {} raises it from {now} to {after}",
                            self.protocol.transitions[t].name
                        ),
                    });
                }
                self.advance(Some(t), next)?;
                Ok(true)
            }
        }
    }

    pub fn seek(&mut self, index: usize) -> Result<(), SessionError> {
        if index >= self.run.len() {
            return Err(SessionError::OutOfRange {
                index,
                len: self.run.len(),
            });
        }
        self.cursor = index;
        Ok(())
    }

    /// Repeats progress steps until the configuration leaves the starting
    /// stage for one of its descendants, or `max_steps` steps were taken.
    pub fn progress_to_child(&mut self, max_steps: u64) -> Result<ProgressReport, SessionError> {
        let (g, i) = self.active_stage().ok_or(SessionError::NoCertificate)?;
        let graph = Arc::clone(&self.graphs);
        let below = graph[g].descendants(i);
        let inside = |s: &Session| {
            s.placements[s.current_id()][g].is_some_and(|k| below.contains(&k))
        };
        let mut steps = 0;
        while !inside(self) && steps < max_steps {
            if !self.progress()? {
                break;
            }
            steps += 1;
        }
        Ok(ProgressReport {
            steps,
            reached: inside(self),
            from: (graph[g].output, graph[g].stages[i].id.clone()),
            to: self.placement_id(self.current_id(), g).map(str::to_owned),
        })
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        let p = &self.protocol;
        SessionSnapshot {
            format_version: crate::io::FORMAT_VERSION,
            protocol: p.name.clone(),
            seed: self.seed,
            rng_word_pos: self.rng.get_word_pos(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, c)| NodeDoc {
                    id,
                    counts: p.config_to_map(c),
                    placement: (0..self.graphs.len())
                        .map(|g| self.placement_id(id, g).map(str::to_owned))
                        .collect(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: e.from,
                    transition: p.transitions[e.transition].name.clone(),
                    to: e.to,
                })
                .collect(),
            run: self.run.clone(),
            cursor: self.cursor,
            certificate_value: self.certificate_value(),
            anomalies: self.anomalies.clone(),
            warnings: self.warnings.clone(),
        }
    }

    /// Rebuilds a session from its snapshot. Placements are recomputed and
    /// must agree with the recorded ones.
    pub fn restore(
        protocol: Arc<Protocol>,
        graphs: Arc<Vec<StageGraph>>,
        snap: &SessionSnapshot,
    ) -> Result<Self, SessionError> {
        let bad = |m: &str| SessionError::BadSnapshot(m.to_owned());
        let first = snap.nodes.first().ok_or_else(|| bad("no nodes"))?;
        let c0 = protocol.config_from_map(&first.counts)?;
        let mut s = Session::new(Arc::clone(&protocol), graphs, c0, snap.seed)?;
        s.run.clear();
        for (k, node) in snap.nodes.iter().enumerate() {
            if node.id != k {
                return Err(bad("node ids are not consecutive"));
            }
            let c = protocol.config_from_map(&node.counts)?;
            if s.intern(c)? != k {
                return Err(bad("duplicate node"));
            }
            let placed: Vec<Option<String>> = (0..s.graphs.len())
                .map(|g| s.placement_id(k, g).map(str::to_owned))
                .collect();
            if placed != node.placement {
                return Err(bad("placement disagrees with the stage graphs"));
            }
        }
        for e in &snap.edges {
            let t = protocol.transition(&e.transition)?;
            let (from, to) = (
                s.nodes.get(e.from).ok_or_else(|| bad("edge source"))?,
                s.nodes.get(e.to).ok_or_else(|| bad("edge target"))?,
            );
            if protocol.apply(from, t).ok().as_ref() != Some(to) {
                return Err(bad("edge is not a transition"));
            }
            s.edges.insert(ChainEdge {
                from: e.from,
                transition: t,
                to: e.to,
            });
        }
        if snap.run.is_empty() || snap.run.iter().any(|&id| id >= s.nodes.len()) {
            return Err(bad("run refers to unknown nodes"));
        }
        if snap.cursor >= snap.run.len() {
            return Err(bad("cursor outside the run"));
        }
        s.run = snap.run.clone();
        s.cursor = snap.cursor;
        s.rng.set_word_pos(snap.rng_word_pos);
        s.anomalies = snap.anomalies.clone();
        s.warnings = snap.warnings.clone();
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    pub counts: std::collections::BTreeMap<String, u64>,
    /// Stage id per graph, output 0 first.
    pub placement: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: usize,
    pub transition: String,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub format_version: u32,
    pub protocol: String,
    pub seed: u64,
    /// Position of the random generator, so a restored session continues
    /// with the same draws.
    pub rng_word_pos: u128,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    pub run: Vec<usize>,
    pub cursor: usize,
    /// Certificate value of the current configuration, when it lies in a
    /// non-terminal stage.
    pub certificate_value: Option<u64>,
    pub anomalies: Vec<Anomaly>,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::majority_voting;
    use crate::synthesis::{synthesize, SynthesisOptions};

    fn setup() -> (Arc<Protocol>, Arc<Vec<StageGraph>>) {
        let p = majority_voting();
        let r = synthesize(&p, SynthesisOptions::default()).unwrap();
        let graphs = r.graphs.iter().map(|g| g.graph.clone()).collect();
        (Arc::new(p), Arc::new(graphs))
    }

    #[test]
    fn null_step_repeats_node_without_edge() {
        let (p, g) = setup();
        let c0 = p.config(&[("y", 2)]).unwrap();
        let mut s = Session::new(p, g, c0, 1).unwrap();
        assert_eq!(s.placement_id(0, 1), Some("S3"));
        s.step(StepCommand::once(StepMode::Random)).unwrap();
        assert_eq!(s.run(), &[0, 0]);
        assert_eq!(s.edges().count(), 0);
    }

    #[test]
    fn zero_repeat_rejected() {
        let (p, g) = setup();
        let c0 = p.config(&[("Y", 1), ("N", 1)]).unwrap();
        let mut s = Session::new(p, g, c0, 1).unwrap();
        let cmd = StepCommand { mode: StepMode::Random, repeat: 0 };
        assert_eq!(s.step(cmd), Err(SessionError::ZeroRepeat));
    }

    #[test]
    fn outside_roots_warns() {
        let (p, g) = setup();
        // Y - N = 0 rules out the output-0 root, Y + y = 0 the output-1 root
        let c0 = p.config(&[("n", 1)]).unwrap();
        let s = Session::new(p, g, c0, 1).unwrap();
        assert_eq!(s.placement(0, 0), None);
        assert_eq!(s.placement(0, 1), None);
        assert_eq!(s.warnings().len(), 1);
    }

    #[test]
    fn snapshot_round_trip() {
        let (p, g) = setup();
        let c0 = p.config(&[("Y", 3), ("N", 2)]).unwrap();
        let mut s = Session::new(Arc::clone(&p), Arc::clone(&g), c0, 9).unwrap();
        s.step(StepCommand { mode: StepMode::Random, repeat: 20 }).unwrap();
        s.seek(5).unwrap();
        let snap = s.snapshot();
        let json = serde_json::to_string(&snap).unwrap();
        let back: SessionSnapshot = serde_json::from_str(&json).unwrap();
        let mut r = Session::restore(p, g, &back).unwrap();
        assert_eq!(r.snapshot(), snap);
        s.step(StepCommand { mode: StepMode::Random, repeat: 7 }).unwrap();
        r.step(StepCommand { mode: StepMode::Random, repeat: 7 }).unwrap();
        assert_eq!(r.snapshot(), s.snapshot());
    }
}
