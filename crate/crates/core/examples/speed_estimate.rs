//! Speed classes and simulated phase lengths of the Majority Voting stages.

use stagecraft::io::majority_voting;
use stagecraft::speed::{estimate, EstimateOptions};
use stagecraft::synthesis::{synthesize, SynthesisOptions};

fn main() {
    let p = majority_voting();
    let r = synthesize(&p, SynthesisOptions::default()).expect("synthesis");
    for g in &r.graphs {
        for s in &g.graph.stages {
            let speed = s.speed.map(|v| v.to_string()).unwrap_or_else(|| "terminal".into());
            println!("{}: {speed}", s.id);
        }
    }
    let (g, i) = r.stage("S0").expect("S0 exists");
    let children: Vec<_> = g.children(i).into_iter().map(|k| &g.stages[k]).collect();
    let opts = EstimateOptions {
        trials: 200,
        seed: 7,
        ..EstimateOptions::default()
    };
    let e = estimate(&p, &g.stages[i], &children, &[4, 8, 16, 32], opts).expect("non-terminal stage");
    let mut out = std::io::stdout();
    e.write_csv(&mut out, true).expect("stdout");
    if let Some(slope) = e.slope {
        println!("log-log slope {slope:.2} (monotone: {})", e.monotone);
    }
}
