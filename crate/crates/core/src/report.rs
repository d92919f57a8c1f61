//! JSON documents for verification results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::io::{stage_graph_to_doc, StageGraphDocument, FORMAT_VERSION};
use crate::model::{Configuration, Protocol};
use crate::oracle::Counterexample;
use crate::stage::{CheckReport, ObligationKind, ObligationStatus};
use crate::synthesis::{GraphResult, Outcome, SynthesisResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Verified,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObligationDoc {
    pub kind: ObligationKind,
    pub stage: Option<String>,
    pub other: Option<String>,
    pub transition: Option<String>,
    /// `proved`, `proved_up_to`, `refuted` or `not_proved`.
    pub status: String,
    pub bound: Option<u64>,
    pub witness: Option<BTreeMap<String, u64>>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReportDoc {
    pub output_value: u8,
    pub bound: u64,
    pub proved: bool,
    pub obligations: Vec<ObligationDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphResultDoc {
    /// Every stage got a certificate or entails the consensus.
    pub complete: bool,
    /// Complete and every obligation proved.
    pub verified: bool,
    pub failure: Option<String>,
    pub stage_graph: StageGraphDocument,
    pub report: CheckReportDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleDoc {
    /// Predicate value of the initial configuration.
    pub expected: u8,
    pub run: Vec<BTreeMap<String, u64>>,
    pub transitions: Vec<String>,
    pub bottom_scc: Vec<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationDocument {
    pub format_version: u32,
    pub protocol: String,
    pub outcome: OutcomeKind,
    pub reason: Option<String>,
    pub counterexample: Option<CounterexampleDoc>,
    /// Output 0 first.
    pub graphs: Vec<GraphResultDoc>,
}

fn config_map(p: &Protocol, c: &Configuration) -> BTreeMap<String, u64> {
    p.config_to_map(c)
}

pub fn check_report_to_doc(p: &Protocol, r: &CheckReport) -> CheckReportDoc {
    let obligations = r
        .obligations
        .iter()
        .map(|o| {
            let (status, bound, witness, detail) = match &o.status {
                ObligationStatus::Proved => ("proved", None, None, None),
                ObligationStatus::ProvedUpTo(n) => ("proved_up_to", Some(*n), None, None),
                ObligationStatus::Refuted { witness, detail } => (
                    "refuted",
                    None,
                    Some(config_map(p, witness)),
                    Some(detail.clone()),
                ),
                ObligationStatus::NotProved { detail } => ("not_proved", None, None, Some(detail.clone())),
            };
            ObligationDoc {
                kind: o.kind,
                stage: o.stage.clone(),
                other: o.other.clone(),
                transition: o.transition.clone(),
                status: status.into(),
                bound,
                witness,
                detail,
            }
        })
        .collect();
    CheckReportDoc {
        output_value: r.output as u8,
        bound: r.bound,
        proved: r.is_proved(),
        obligations,
    }
}

pub fn graph_result_to_doc(p: &Protocol, g: &GraphResult) -> GraphResultDoc {
    GraphResultDoc {
        complete: g.complete,
        verified: g.is_verified(),
        failure: g.failure.clone(),
        stage_graph: stage_graph_to_doc(p, &g.graph),
        report: check_report_to_doc(p, &g.report),
    }
}

pub fn counterexample_to_doc(p: &Protocol, cex: &Counterexample) -> CounterexampleDoc {
    CounterexampleDoc {
        expected: cex.expected as u8,
        run: cex.run.configurations.iter().map(|c| config_map(p, c)).collect(),
        transitions: cex
            .run
            .transitions
            .iter()
            .map(|&t| p.transitions[t].name.clone())
            .collect(),
        bottom_scc: cex.bottom_scc.iter().map(|c| config_map(p, c)).collect(),
    }
}

pub fn verification_to_doc(p: &Protocol, r: &SynthesisResult) -> VerificationDocument {
    let (outcome, reason, counterexample) = match &r.outcome {
        Outcome::Verified => (OutcomeKind::Verified, None, None),
        Outcome::Refuted(cex) => (OutcomeKind::Refuted, None, Some(counterexample_to_doc(p, cex))),
        Outcome::Inconclusive(why) => (OutcomeKind::Inconclusive, Some(why.clone()), None),
    };
    VerificationDocument {
        format_version: FORMAT_VERSION,
        protocol: p.name.clone(),
        outcome,
        reason,
        counterexample,
        graphs: r.graphs.iter().map(|g| graph_result_to_doc(p, g)).collect(),
    }
}
