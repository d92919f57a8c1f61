//! Protocol files: round trip of the bundled examples and error reporting.

use stagecraft::io::{load_examples, parse_protocol, serialize_protocol};

fn main() {
    for p in load_examples() {
        let text = serialize_protocol(&p);
        let back = parse_protocol(text.as_bytes()).expect("serialized protocols parse");
        assert_eq!(back, p);
        println!(
            "{}: {} states, {} transitions, round trip ok",
            p.name,
            p.num_states(),
            p.transitions.len()
        );
    }
    let bad = br#"{"name": "Typo", "states": ["q"], "initial": ["q"], "output": {"q": 1},
  "transitions": [{"name": "t", "pre": ["q", "r"], "post": ["q", "q"]}],
  "predicate": {"coeffs": {}, "op": ">=", "const": 0}}"#;
    match parse_protocol(bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: [{}] {} at {}", e.code.as_str(), e.message, e.location),
    }
}
