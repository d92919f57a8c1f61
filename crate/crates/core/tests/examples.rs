//! Runs the example programs that `cargo test` builds alongside the tests.

use std::path::PathBuf;
use std::process::Command;

fn run(name: &str) -> Option<String> {
    // test binaries live in target/<profile>/deps, examples in target/<profile>/examples
    let exe = std::env::current_exe().ok()?;
    let dir: PathBuf = exe.parent()?.parent()?.join("examples");
    let path = dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
    if !path.exists() {
        eprintln!("skipping {name}: {} not built", path.display());
        return None;
    }
    let out = Command::new(&path).output().expect("example starts");
    assert!(out.status.success(), "{name} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    Some(String::from_utf8(out.stdout).expect("utf-8 output"))
}

#[test]
fn examples_run() {
    let expectations: [(&str, &[&str]); 7] = [
        ("synthesize_majority", &["verified", "refuted: {Y, N} -> {y, n}"]),
        ("oracle_verify", &["correct for every population of at most 8 agents", "bottom: {y, n}"]),
        ("check_stage_graph", &["=> valid", "=> invalid", "TerminalConsensus S5: refuted"]),
        ("speed_estimate", &["S4: 2^O(n log n)", "stage,n,mean,trials,censored"]),
        ("session_progress", &["certificate 2", "{N, 6·n} in [S5, -]"]),
        ("io_roundtrip", &["round trip ok", "rejected: [unknown_state]"]),
        ("serve_api", &["HTTP/1.1 201 Created", "HTTP/1.1 409 Conflict"]),
    ];
    for (name, needles) in expectations {
        let Some(text) = run(name) else { continue };
        for n in needles {
            assert!(text.contains(n), "{name} output lacks {n:?}:\n{text}");
        }
    }
}
