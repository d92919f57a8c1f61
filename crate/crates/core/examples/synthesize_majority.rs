//! Synthesizes both stage graphs of Majority Voting and prints them.

use stagecraft::io::{majority_voting, majority_voting_broken};
use stagecraft::synthesis::{synthesize, Outcome, SynthesisOptions};

fn main() {
    for p in [majority_voting(), majority_voting_broken()] {
        let start = std::time::Instant::now();
        let r = synthesize(&p, SynthesisOptions::default()).expect("synthesis");
        println!("== {} ({:.2?})", p.name, start.elapsed());
        for g in &r.graphs {
            println!("output {}:", g.graph.output as u8);
            for s in &g.graph.stages {
                let cert = s
                    .certificate
                    .as_ref()
                    .map(|f| f.display(&p).to_string())
                    .unwrap_or_else(|| "-".into());
                let witness = s
                    .witness
                    .as_ref()
                    .map(|c| c.display(&p).to_string())
                    .unwrap_or_else(|| "-".into());
                let speed = s.speed.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
                println!("  {}: {}", s.id, s.constraint.display(&p));
                println!("      certificate {cert}, speed {speed}, witness {witness}");
            }
            for (a, b) in &g.graph.edges {
                println!("  {} -> {}", g.graph.stages[*a].id, g.graph.stages[*b].id);
            }
            if let Some(f) = &g.failure {
                println!("  incomplete: {f}");
            }
        }
        match &r.outcome {
            Outcome::Verified => println!("verified"),
            Outcome::Refuted(cex) => {
                let run: Vec<String> = cex.run.configurations.iter().map(|c| c.display(&p).to_string()).collect();
                println!("refuted: {}", run.join(" -> "));
            }
            Outcome::Inconclusive(why) => println!("inconclusive: {why}"),
        }
    }
}
