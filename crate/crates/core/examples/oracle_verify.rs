//! Brute-force verification of small populations with the explicit-state
//! oracle.

use stagecraft::io::{majority_voting, majority_voting_broken};
use stagecraft::oracle::{explore, stabilizes, verify_bounded, ExploreOptions, Verdict};

fn main() {
    let opts = ExploreOptions::default();
    for p in [majority_voting(), majority_voting_broken()] {
        println!("== {}", p.name);
        match verify_bounded(&p, 8, opts).expect("within budget") {
            Verdict::CorrectUpTo(n) => println!("correct for every population of at most {n} agents"),
            Verdict::Counterexample(cex) => {
                let run: Vec<String> = cex.run.configurations.iter().map(|c| c.display(&p).to_string()).collect();
                println!("expected output {} but the run {} ends in a bottom SCC", cex.expected as u8, run.join(" -> "));
                for c in &cex.bottom_scc {
                    println!("  bottom: {}", c.display(&p));
                }
            }
        }
        let c0 = p.config(&[("Y", 4), ("N", 5)]).expect("valid configuration");
        let g = explore(&p, &c0, opts).expect("within budget");
        println!(
            "{} reaches {} configurations and stabilizes to {:?}",
            c0.display(&p),
            g.len(),
            stabilizes(&p, &c0, opts).expect("within budget")
        );
    }
}
