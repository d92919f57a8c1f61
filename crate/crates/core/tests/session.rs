mod common;

use std::sync::Arc;

use common::*;
use stagecraft::session::{Session, SessionError, StepCommand, StepMode};
use stagecraft::stage::StageGraph;
use stagecraft::synthesis::{synthesize, SynthesisOptions};
use stagecraft::{Configuration, Protocol};

fn setup(p: Protocol) -> (Arc<Protocol>, Arc<Vec<StageGraph>>) {
    let r = synthesize(&p, SynthesisOptions::default()).unwrap();
    let graphs = r.graphs.iter().map(|g| g.graph.clone()).collect();
    (Arc::new(p), Arc::new(graphs))
}

fn session(c: &[(&str, u64)], seed: u64) -> Session {
    let (p, g) = setup(majority());
    let c0 = cfg(&p, c);
    Session::new(p, g, c0, seed).unwrap()
}

fn placed(s: &Session) -> (Option<&str>, Option<&str>) {
    let id = s.current_id();
    (s.placement_id(id, 0), s.placement_id(id, 1))
}

#[test]
fn initial_placements() {
    let s = session(&[("N", 1), ("n", 4), ("y", 2)], 0);
    assert_eq!(placed(&s), (Some("S4"), None));
    assert!(s.warnings().is_empty());
    let s = session(&[("Y", 1), ("N", 1)], 0);
    assert_eq!(placed(&s), (None, Some("S1")));
    let s = session(&[("y", 2)], 0);
    assert_eq!(placed(&s), (None, Some("S3")));
}

#[test]
fn empty_configuration_rejected() {
    let (p, g) = setup(majority());
    let c0 = Configuration::empty(4);
    assert!(matches!(Session::new(p, g, c0, 0), Err(SessionError::Model(_))));
}

#[test]
fn progress_step_takes_the_decreasing_transition() {
    let mut s = session(&[("N", 1), ("n", 4), ("y", 2)], 0);
    assert_eq!(s.certificate_value(), Some(2));
    s.step(StepCommand::once(StepMode::Progress)).unwrap();
    let p = s.protocol().clone();
    assert_eq!(s.current(), &cfg(&p, &[("N", 1), ("n", 5), ("y", 1)]));
    assert_eq!(s.certificate_value(), Some(1));
    let e = s.edges().next().unwrap();
    assert_eq!(p.transitions[e.transition].name, "c");
    assert!(s.anomalies().is_empty());
}

#[test]
fn manual_pair_fires_the_matching_transition() {
    let mut s = session(&[("Y", 1), ("N", 1)], 0);
    let p = s.protocol().clone();
    let (y, n) = (p.state("Y").unwrap(), p.state("N").unwrap());
    s.step(StepCommand::once(StepMode::Manual(y, n))).unwrap();
    assert_eq!(s.current(), &cfg(&p, &[("y", 1), ("n", 1)]));
    // the pair is gone now
    let err = s.step(StepCommand::once(StepMode::Manual(y, n))).unwrap_err();
    assert_eq!(err, SessionError::PairNotPresent("Y".into(), "N".into()));
    // two agents in the same state need two of them
    let err = s.step(StepCommand::once(StepMode::Manual(p.state("y").unwrap(), p.state("y").unwrap())));
    assert!(err.is_err());
}

#[test]
fn manual_pair_without_transition_is_a_null_step() {
    let mut s = session(&[("Y", 2)], 0);
    let y = s.protocol().state("Y").unwrap();
    s.step(StepCommand::once(StepMode::Manual(y, y))).unwrap();
    assert_eq!(s.run(), &[0, 0]);
    assert_eq!(s.edges().count(), 0);
}

#[test]
fn random_null_step() {
    let mut s = session(&[("y", 2)], 3);
    s.step(StepCommand::once(StepMode::Random)).unwrap();
    assert_eq!(s.run().len(), 2);
    assert_eq!(s.nodes().len(), 1);
}

#[test]
fn progress_in_terminal_stage_is_an_error() {
    let mut s = session(&[("y", 2)], 0);
    assert_eq!(
        s.step(StepCommand::once(StepMode::Progress)),
        Err(SessionError::NoCertificate)
    );
    assert!(s.progress_to_child(5).is_err());
}

#[test]
fn seek_and_truncation() {
    let mut s = session(&[("Y", 3), ("N", 2)], 42);
    s.step(StepCommand { mode: StepMode::Random, repeat: 10 }).unwrap();
    assert_eq!(s.run().len(), 11);
    s.seek(0).unwrap();
    assert_eq!(s.current_id(), 0);
    s.seek(1).unwrap();
    assert_eq!(s.current_id(), s.run()[1]);
    assert_eq!(s.seek(11), Err(SessionError::OutOfRange { index: 11, len: 11 }));
    let nodes = s.nodes().len();
    let edges = s.edges().count();
    s.step(StepCommand::once(StepMode::Random)).unwrap();
    assert_eq!(s.run().len(), 3);
    assert_eq!(s.cursor(), 2);
    assert!(s.nodes().len() >= nodes);
    assert!(s.edges().count() >= edges);
}

#[test]
fn replaying_commands_gives_identical_sessions() {
    let script = |seed| {
        let mut s = session(&[("Y", 3), ("N", 3)], seed);
        s.step(StepCommand { mode: StepMode::Random, repeat: 8 }).unwrap();
        s.seek(3).unwrap();
        s.step(StepCommand { mode: StepMode::Random, repeat: 5 }).unwrap();
        s.seek(1).unwrap();
        s.step(StepCommand { mode: StepMode::Random, repeat: 4 }).unwrap();
        s.snapshot()
    };
    assert_eq!(script(17), script(17));
}

#[test]
fn chain_edges_and_placements_stay_consistent() {
    let mut s = session(&[("Y", 3), ("N", 4)], 5);
    s.step(StepCommand { mode: StepMode::Random, repeat: 200 }).unwrap();
    let p = s.protocol().clone();
    for e in s.edges() {
        assert_eq!(p.apply(&s.nodes()[e.from], e.transition).unwrap(), s.nodes()[e.to]);
    }
    for (id, c) in s.nodes().iter().enumerate() {
        for (g, graph) in s.graphs().iter().enumerate() {
            assert_eq!(s.placement(id, g), graph.locate(c).unwrap());
        }
    }
    for w in s.run().windows(2) {
        assert!(w[0] == w[1] || s.edges().any(|e| e.from == w[0] && e.to == w[1]));
    }
}

#[test]
fn progress_to_child_examples() {
    let mut s = session(&[("N", 1), ("n", 4), ("y", 2)], 0);
    let r = s.progress_to_child(100).unwrap();
    assert_eq!(r.steps, 2);
    assert!(r.reached);
    assert_eq!(r.from, (false, "S4".into()));
    assert_eq!(r.to.as_deref(), Some("S5"));
    assert_eq!(s.certificate_value(), None);
}

#[test]
fn progress_to_child_respects_the_step_limit() {
    let mut s = session(&[("Y", 1), ("N", 5)], 0);
    let r = s.progress_to_child(0).unwrap();
    assert_eq!(r.steps, 0);
    assert!(!r.reached);
}

#[test]
fn progress_never_raises_the_certificate_on_majority() {
    let (p, g) = setup(majority());
    for c in small_configs(4, 6) {
        let mut s = Session::new(Arc::clone(&p), Arc::clone(&g), c, 0).unwrap();
        while s.active_stage().is_some() && s.run().len() < 100 {
            let before = s.certificate_value().unwrap();
            let stage = s.active_stage();
            s.step(StepCommand::once(StepMode::Progress)).unwrap();
            if s.active_stage() == stage {
                assert!(s.certificate_value().unwrap() <= before);
            }
        }
        assert!(s.anomalies().is_empty());
    }
}

#[test]
fn incomplete_chain_leaf_has_no_certificate() {
    let (p, g) = setup(broken());
    let y = p.state("Y").unwrap();
    let n = p.state("N").unwrap();
    let c0 = cfg(&p, &[("Y", 1), ("N", 1)]);
    let mut s = Session::new(p, g, c0, 0).unwrap();
    s.step(StepCommand::once(StepMode::Manual(y, n))).unwrap();
    // {y, n} lies in the last stage of the incomplete output-1 chain, which
    // the synthesizer left as a leaf
    assert_eq!(s.step(StepCommand::once(StepMode::Progress)), Err(SessionError::NoCertificate));
}

#[test]
fn stuck_progress_is_reported_as_anomaly() {
    let p = broken();
    let graphs = vec![hand_graph0(&p), hand_graph1(&p)];
    let c0 = cfg(&p, &[("y", 1), ("n", 1)]);
    let mut s = Session::new(Arc::new(p), Arc::new(graphs), c0, 0).unwrap();
    assert_eq!(placed(&s), (None, Some("S2")));
    let r = s.progress_to_child(10).unwrap();
    assert_eq!(r.steps, 0);
    assert!(!r.reached);
    assert_eq!(s.anomalies().len(), 1);
    assert_eq!(s.anomalies()[0].stage, "S2");
}
