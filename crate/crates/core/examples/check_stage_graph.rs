//! Checks a hand-written stage graph document against a protocol, then a
//! faulty variant of it.

use stagecraft::io::{majority_voting, parse_stage_graph};
use stagecraft::oracle::ExploreOptions;
use stagecraft::stage::{check_stage_graph, CheckReport, ObligationStatus};
use stagecraft::Protocol;

const GRAPH: &str = r#"{
  "format_version": 1,
  "output_value": 0,
  "stages": [
    {"id": "S0", "certificate": {"Y": 1},
     "constraints": [{"coeffs": {"N": 1, "Y": -1}, "op": ">=", "const": 1}]},
    {"id": "S4", "certificate": {"y": 1},
     "constraints": [{"coeffs": {"N": 1, "Y": -1}, "op": ">=", "const": 1},
                     {"coeffs": {"Y": 1}, "op": "=", "const": 0}]},
    {"id": "S5",
     "constraints": [{"coeffs": {"N": 1, "Y": -1}, "op": ">=", "const": 1},
                     {"coeffs": {"Y": 1, "y": 1}, "op": "=", "const": 0}]}
  ],
  "edges": [{"parent": "S0", "child": "S4"}, {"parent": "S4", "child": "S5"}]
}"#;

fn print(p: &Protocol, r: &CheckReport) {
    for o in &r.obligations {
        let status = match &o.status {
            ObligationStatus::Proved => "proved".to_string(),
            ObligationStatus::ProvedUpTo(n) => format!("proved up to {n} agents"),
            ObligationStatus::Refuted { witness, detail } => format!("refuted at {}: {detail}", witness.display(p)),
            ObligationStatus::NotProved { detail } => format!("not proved: {detail}"),
        };
        let subject = [&o.stage, &o.other, &o.transition]
            .iter()
            .filter_map(|s| s.as_deref())
            .collect::<Vec<_>>()
            .join(" ");
        println!("  {:?} {subject}: {status}", o.kind);
    }
    println!("  => {}", if r.is_proved() { "valid" } else { "invalid" });
}

fn main() {
    let p = majority_voting();
    let opts = ExploreOptions::default();
    let g = parse_stage_graph(&p, GRAPH.as_bytes()).expect("well-formed document");
    println!("output-0 graph of {}:", p.name);
    print(&p, &check_stage_graph(&p, &g, 7, opts).expect("within budget"));

    // a terminal stage that still admits y agents next to N agents
    let faulty = GRAPH.replace(
        r#"{"coeffs": {"Y": 1, "y": 1}, "op": "=", "const": 0}"#,
        r#"{"coeffs": {"Y": 1, "n": 1}, "op": "=", "const": 0}"#,
    );
    let g = parse_stage_graph(&p, faulty.as_bytes()).expect("well-formed document");
    println!("same graph with S5 defined by C(Y) + C(n) = 0:");
    print(&p, &check_stage_graph(&p, &g, 7, opts).expect("within budget"));
}
