//! A simulation session: progress steps towards the next stage, random
//! steps, rewinding and a JSON snapshot.

use std::sync::Arc;

use stagecraft::io::majority_voting;
use stagecraft::session::{Session, StepCommand, StepMode};
use stagecraft::synthesis::{synthesize, SynthesisOptions};

fn describe(s: &Session) -> String {
    let id = s.current_id();
    let placed: Vec<String> = (0..s.graphs().len())
        .map(|g| s.placement_id(id, g).unwrap_or("-").to_string())
        .collect();
    let value = s.certificate_value().map(|v| v.to_string()).unwrap_or_else(|| "-".into());
    format!("{} in [{}], certificate {value}", s.current().display(s.protocol()), placed.join(", "))
}

fn main() {
    let p = majority_voting();
    let r = synthesize(&p, SynthesisOptions::default()).expect("synthesis");
    let graphs = Arc::new(r.graphs.iter().map(|g| g.graph.clone()).collect::<Vec<_>>());
    let c0 = p.config(&[("N", 1), ("n", 4), ("y", 2)]).expect("valid configuration");
    let mut s = Session::new(Arc::new(p), graphs, c0, 2024).expect("session");
    println!("start: {}", describe(&s));
    while s.certificate_value().is_some() {
        s.step(StepCommand::once(StepMode::Progress)).expect("progress step");
        println!("progress: {}", describe(&s));
    }

    s.seek(0).expect("in range");
    s.step(StepCommand { mode: StepMode::Random, repeat: 5 }).expect("random steps");
    println!("after rewinding and 5 random steps: {}", describe(&s));
    println!("run {:?}, {} nodes, {} edges", s.run(), s.nodes().len(), s.edges().count());
    let snap = serde_json::to_string_pretty(&s.snapshot()).expect("serializable");
    println!("{snap}");
}
