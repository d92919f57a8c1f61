mod common;

use common::*;
use stagecraft::io::parse_protocol;
use stagecraft::speed::{classify, classify_stage, estimate, phase_start, EstimateOptions, SpeedClass};
use stagecraft::stage::{dead_transitions, StageGraph};
use stagecraft::synthesis::{synthesize, SynthesisOptions};
use stagecraft::Protocol;

fn graphs(p: &Protocol) -> Vec<StageGraph> {
    let r = synthesize(p, SynthesisOptions::default()).unwrap();
    r.graphs.iter().map(|g| g.graph.clone()).collect()
}

fn class_of(p: &Protocol, g: &StageGraph, i: usize) -> Option<SpeedClass> {
    let s = &g.stages[i];
    s.certificate
        .as_ref()
        .map(|f| classify(p, f, &dead_transitions(p, &s.constraint)))
}

#[test]
fn classes_of_the_hand_built_graphs() {
    let p = majority();
    let g0 = hand_graph0(&p);
    let g1 = hand_graph1(&p);
    assert_eq!(class_of(&p, &g0, 0), Some(SpeedClass::QuadLog));
    assert_eq!(class_of(&p, &g0, 1), Some(SpeedClass::ExpNLogN));
    assert_eq!(class_of(&p, &g0, 2), None);
    assert_eq!(class_of(&p, &g1, 0), Some(SpeedClass::QuadLog));
    assert_eq!(class_of(&p, &g1, 1), Some(SpeedClass::QuadLog));
    assert!(classify_stage(&p, &g0.stages[2]).is_err());
}

#[test]
fn classification_ignores_names_and_order() {
    // Majority with renamed states, permuted state list and reversed transitions
    let q = parse_protocol(
        br#"{"name":"Renamed","states":["lo","no","yes","hi"],"initial":["hi","no"],
        "output":{"hi":1,"yes":1,"no":0,"lo":0},
        "transitions":[{"name":"t4","pre":["yes","lo"],"post":["yes","yes"]},
                       {"name":"t3","pre":["no","yes"],"post":["no","lo"]},
                       {"name":"t2","pre":["hi","lo"],"post":["hi","yes"]},
                       {"name":"t1","pre":["hi","no"],"post":["yes","lo"]}],
        "predicate":{"coeffs":{"hi":1,"no":-1},"op":">=","const":0}}"#,
    )
    .unwrap();
    let p = majority();
    let speeds = |p: &Protocol| -> Vec<Vec<Option<SpeedClass>>> {
        graphs(p)
            .iter()
            .map(|g| g.stages.iter().map(|s| s.speed).collect())
            .collect()
    };
    assert_eq!(speeds(&p), speeds(&q));
}

#[test]
fn root_phase_grows_polynomially() {
    let p = majority();
    let g = graphs(&p);
    let (s0, s4) = (&g[0].stages[0], &g[0].stages[1]);
    let opts = EstimateOptions {
        trials: 200,
        seed: 1,
        ..EstimateOptions::default()
    };
    let e = estimate(&p, s0, &[s4], &[4, 8, 16], opts).unwrap();
    assert_eq!(e.points.len(), 3);
    let slope = e.slope.unwrap();
    assert!((1.5..=3.5).contains(&slope), "slope {slope}");
    assert!(e.monotone);
    assert!(e.points.iter().all(|pt| pt.censored == 0 && pt.trials == 200));
    assert_eq!(e, estimate(&p, s0, &[s4], &[4, 8, 16], opts).unwrap());
}

#[test]
fn single_trial_one_step_from_child() {
    let p = majority();
    let g = graphs(&p);
    let (s1, s2) = (&g[1].stages[0], &g[1].stages[1]);
    let opts = EstimateOptions {
        trials: 1,
        ..EstimateOptions::default()
    };
    let e = estimate(&p, s1, &[s2], &[2], opts).unwrap();
    assert_eq!(e.points[0].start, cfg(&p, &[("Y", 1), ("N", 1)]));
    assert!(e.points[0].mean() >= 1.0);
}

#[test]
fn sizes_without_start_are_skipped() {
    let p = majority();
    let g = graphs(&p);
    let (s0, s4) = (&g[0].stages[0], &g[0].stages[1]);
    // S0 minus S4 needs a Y agent and strictly more N agents
    assert_eq!(phase_start(&p, s0, &[s4], 2), None);
    let e = estimate(&p, s0, &[s4], &[1, 2, 3], EstimateOptions { trials: 5, ..Default::default() }).unwrap();
    assert_eq!(e.skipped, vec![1, 2]);
    assert_eq!(e.points.len(), 1);
    assert!(estimate(&p, &g[0].stages[2], &[], &[4], EstimateOptions::default()).is_err());
}

#[test]
fn slow_stage_gets_censored_as_n_grows() {
    let p = majority();
    let g = graphs(&p);
    let (s4, s5) = (&g[0].stages[1], &g[0].stages[2]);
    let opts = EstimateOptions {
        trials: 40,
        seed: 3,
        interaction_cap: 20_000,
    };
    let e = estimate(&p, s4, &[s5], &[4, 12, 20], opts).unwrap();
    let rate: Vec<u64> = e.points.iter().map(|pt| pt.censored).collect();
    assert_eq!(rate[0], 0);
    assert!(rate.windows(2).all(|w| w[0] <= w[1]), "{rate:?}");
    assert!(rate[2] > 0, "{rate:?}");
}

#[test]
fn csv_output() {
    let p = majority();
    let g = graphs(&p);
    let (s0, s4) = (&g[0].stages[0], &g[0].stages[1]);
    let e = estimate(&p, s0, &[s4], &[3], EstimateOptions { trials: 4, ..Default::default() }).unwrap();
    let mut out = Vec::new();
    e.write_csv(&mut out, true).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "stage,n,mean,trials,censored");
    assert!(lines[1].starts_with("S0,3,"));
    assert!(lines[1].ends_with(",4,0"));
}
