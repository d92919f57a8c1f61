//! JSON file formats for protocols and stage graphs.
//!
//! Both formats carry a `format_version` field (currently `1`). Serialization
//! is canonical: object keys are sorted, states and transitions keep their
//! declaration order, output is pretty-printed UTF-8 terminated by a newline.
//! Parsing reports errors with a machine-readable [`IoErrorCode`] and a
//! [`Location`] (line/column for syntax errors, a field path otherwise).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::linear::{ConstraintSet, LinearConstraint, Relation};
use crate::model::{Comparison, Configuration, ModelError, Protocol, ProtocolSpec};
use crate::speed::SpeedClass;
use crate::stage::{Certificate, Stage, StageGraph};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IoErrorCode {
    Syntax,
    Schema,
    UnsupportedVersion,
    UnknownState,
    DuplicateState,
    UnknownInitialState,
    MissingOutput,
    BadOutput,
    DuplicateTransition,
    DuplicatePrePair,
    PredicateNonInitial,
    UnsupportedPredicate,
    UnknownTransition,
    DuplicateStage,
    UnknownStage,
    CyclicGraph,
    MultipleRoots,
    NoRoot,
    BadCertificate,
    BadOutputValue,
}

impl IoErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IoErrorCode::Syntax => "syntax",
            IoErrorCode::Schema => "schema",
            IoErrorCode::UnsupportedVersion => "unsupported_version",
            IoErrorCode::UnknownState => "unknown_state",
            IoErrorCode::DuplicateState => "duplicate_state",
            IoErrorCode::UnknownInitialState => "unknown_initial_state",
            IoErrorCode::MissingOutput => "missing_output",
            IoErrorCode::BadOutput => "bad_output",
            IoErrorCode::DuplicateTransition => "duplicate_transition",
            IoErrorCode::DuplicatePrePair => "duplicate_pre_pair",
            IoErrorCode::PredicateNonInitial => "predicate_non_initial",
            IoErrorCode::UnsupportedPredicate => "unsupported_predicate",
            IoErrorCode::UnknownTransition => "unknown_transition",
            IoErrorCode::DuplicateStage => "duplicate_stage",
            IoErrorCode::UnknownStage => "unknown_stage",
            IoErrorCode::CyclicGraph => "cyclic_graph",
            IoErrorCode::MultipleRoots => "multiple_roots",
            IoErrorCode::NoRoot => "no_root",
            IoErrorCode::BadCertificate => "bad_certificate",
            IoErrorCode::BadOutputValue => "bad_output_value",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Location {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(field) = &self.field {
            parts.push(field.clone());
        }
        if let Some(line) = self.line {
            parts.push(format!("line {line}"));
        }
        if let Some(col) = self.column {
            parts.push(format!("column {col}"));
        }
        f.write_str(&parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{message} ({location})")]
pub struct IoError {
    pub code: IoErrorCode,
    pub message: String,
    pub location: Location,
}

impl IoError {
    fn at(code: IoErrorCode, field: impl Into<String>, message: impl Into<String>) -> Self {
        IoError {
            code,
            message: message.into(),
            location: Location {
                field: Some(field.into()),
                ..Location::default()
            },
        }
    }

    /// Fills in line/column from the first occurrence of `"token"` in `text`.
    fn with_token(mut self, text: &str, token: &str) -> Self {
        let needle = format!("\"{token}\"");
        if let Some(offset) = text.find(&needle) {
            let before = &text[..offset];
            let line = before.matches('\n').count() + 1;
            let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            self.location.line = Some(line);
            self.location.column = Some(column);
        }
        self
    }
}

fn json_error(e: serde_json::Error) -> IoError {
    let code = match e.classify() {
        serde_json::error::Category::Data => IoErrorCode::Schema,
        _ => IoErrorCode::Syntax,
    };
    IoError {
        code,
        message: e.to_string(),
        location: Location {
            line: Some(e.line()),
            column: Some(e.column()),
            field: None,
        },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    #[serde(default)]
    format_version: Option<u32>,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    states: Vec<String>,
    initial: Vec<String>,
    output: BTreeMap<String, i64>,
    transitions: Vec<RawTransition>,
    predicate: RawPredicate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    name: String,
    pre: [String; 2],
    post: [String; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPredicate {
    coeffs: BTreeMap<String, i64>,
    op: String,
    #[serde(rename = "const")]
    constant: i64,
}

fn check_version(v: Option<u32>) -> Result<(), IoError> {
    match v {
        None | Some(FORMAT_VERSION) => Ok(()),
        Some(other) => Err(IoError::at(
            IoErrorCode::UnsupportedVersion,
            "format_version",
            format!("unsupported format_version {other}, expected {FORMAT_VERSION}"),
        )),
    }
}

/// Parses and validates a protocol file.
pub fn parse_protocol(text: &[u8]) -> Result<Protocol, IoError> {
    let raw: RawProtocol = serde_json::from_slice(text).map_err(json_error)?;
    let text = String::from_utf8_lossy(text);
    check_version(raw.format_version)?;
    validate_protocol(&raw).map_err(|(e, token)| match token {
        Some(t) => e.with_token(&text, &t),
        None => e,
    })
}

fn validate_protocol(raw: &RawProtocol) -> Result<Protocol, (IoError, Option<String>)> {
    let err = |code, field: String, msg: String, token: Option<&str>| {
        (IoError::at(code, field, msg), token.map(str::to_string))
    };
    let mut known = HashSet::new();
    for (i, s) in raw.states.iter().enumerate() {
        if !known.insert(s.as_str()) {
            return Err(err(
                IoErrorCode::DuplicateState,
                format!("states[{i}]"),
                format!("duplicate state \"{s}\""),
                Some(s),
            ));
        }
    }
    for (i, s) in raw.initial.iter().enumerate() {
        if !known.contains(s.as_str()) {
            return Err(err(
                IoErrorCode::UnknownInitialState,
                format!("initial[{i}]"),
                format!("initial state \"{s}\" is not declared"),
                Some(s),
            ));
        }
    }
    for (s, &v) in &raw.output {
        if !known.contains(s.as_str()) {
            return Err(err(
                IoErrorCode::UnknownState,
                format!("output.{s}"),
                format!("output given for undeclared state \"{s}\""),
                Some(s),
            ));
        }
        if v != 0 && v != 1 {
            return Err(err(
                IoErrorCode::BadOutput,
                format!("output.{s}"),
                format!("output of \"{s}\" must be 0 or 1, got {v}"),
                Some(s),
            ));
        }
    }
    for s in &raw.states {
        if !raw.output.contains_key(s) {
            return Err(err(
                IoErrorCode::MissingOutput,
                "output".into(),
                format!("no output declared for state \"{s}\""),
                None,
            ));
        }
    }
    let mut names = HashSet::new();
    for (i, t) in raw.transitions.iter().enumerate() {
        if !names.insert(t.name.as_str()) {
            return Err(err(
                IoErrorCode::DuplicateTransition,
                format!("transitions[{i}].name"),
                format!("duplicate transition name \"{}\"", t.name),
                Some(&t.name),
            ));
        }
        for (side, pair) in [("pre", &t.pre), ("post", &t.post)] {
            for (j, s) in pair.iter().enumerate() {
                if !known.contains(s.as_str()) {
                    return Err(err(
                        IoErrorCode::UnknownState,
                        format!("transitions[{i}].{side}[{j}]"),
                        format!("transition \"{}\" refers to undeclared state \"{s}\"", t.name),
                        Some(s),
                    ));
                }
            }
        }
    }
    let initial: HashSet<&str> = raw.initial.iter().map(String::as_str).collect();
    for s in raw.predicate.coeffs.keys() {
        if !known.contains(s.as_str()) {
            return Err(err(
                IoErrorCode::UnknownState,
                format!("predicate.coeffs.{s}"),
                format!("predicate refers to undeclared state \"{s}\""),
                Some(s),
            ));
        }
        if !initial.contains(s.as_str()) {
            return Err(err(
                IoErrorCode::PredicateNonInitial,
                format!("predicate.coeffs.{s}"),
                format!("predicate refers to non-initial state \"{s}\""),
                Some(s),
            ));
        }
    }
    let cmp = match raw.predicate.op.as_str() {
        ">=" => Comparison::Ge,
        ">" => Comparison::Gt,
        "=" => Comparison::Eq,
        other => {
            return Err(err(
                IoErrorCode::UnsupportedPredicate,
                "predicate.op".into(),
                format!("unsupported predicate operator \"{other}\" (expected >=, > or =)"),
                Some(other),
            ))
        }
    };
    let spec = ProtocolSpec {
        name: raw.name.clone(),
        description: raw.description.clone(),
        states: raw.states.clone(),
        initial: raw.initial.clone(),
        output: raw.output.clone(),
        transitions: raw
            .transitions
            .iter()
            .map(|t| (t.name.clone(), t.pre.clone(), t.post.clone()))
            .collect(),
        predicate_coeffs: raw.predicate.coeffs.clone(),
        predicate_cmp: Some(cmp),
        predicate_const: raw.predicate.constant,
    };
    Protocol::from_spec(spec).map_err(|e| match e {
        ModelError::NondeterministicPair { ref second, .. } => {
            let i = raw
                .transitions
                .iter()
                .position(|t| &t.name == second)
                .unwrap_or(0);
            err(
                IoErrorCode::DuplicatePrePair,
                format!("transitions[{i}].pre"),
                e.to_string(),
                Some(second),
            )
        }
        other => err(IoErrorCode::Schema, String::new(), other.to_string(), None),
    })
}

fn raw_protocol(p: &Protocol) -> RawProtocol {
    RawProtocol {
        format_version: Some(FORMAT_VERSION),
        name: p.name.clone(),
        description: p.description.clone(),
        states: p.states.clone(),
        initial: p.initial_states().map(|q| p.states[q].clone()).collect(),
        output: p
            .states
            .iter()
            .zip(&p.output)
            .map(|(s, &o)| (s.clone(), o as i64))
            .collect(),
        transitions: p
            .transitions
            .iter()
            .map(|t| RawTransition {
                name: t.name.clone(),
                pre: [p.states[t.pre.0].clone(), p.states[t.pre.1].clone()],
                post: [p.states[t.post.0].clone(), p.states[t.post.1].clone()],
            })
            .collect(),
        predicate: RawPredicate {
            coeffs: p
                .predicate
                .coefficients
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(q, &c)| (p.states[q].clone(), c))
                .collect(),
            op: p.predicate.comparison.to_string(),
            constant: p.predicate.constant,
        },
    }
}

/// Rebuilds every object with its keys in sorted order.
pub fn canonical_value(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map
                .into_iter()
                .map(|(k, v)| (k, canonical_value(v)))
                .collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical_value).collect()),
        other => other,
    }
}

/// Canonical pretty JSON text, newline-terminated.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("document serializes to JSON");
    let mut s = serde_json::to_string_pretty(&canonical_value(v)).expect("valid JSON value");
    s.push('\n');
    s
}

pub fn serialize_protocol(p: &Protocol) -> String {
    to_canonical_string(&raw_protocol(p))
}

/// JSON value of a protocol, as served by the API.
pub fn protocol_value(p: &Protocol) -> Value {
    canonical_value(serde_json::to_value(raw_protocol(p)).expect("protocol serializes"))
}

const MAJORITY_VOTING: &str = include_str!("../protocols/majority_voting.json");
const MAJORITY_VOTING_BROKEN: &str = include_str!("../protocols/majority_voting_broken.json");

/// The protocols shipped with the crate.
pub fn load_examples() -> Vec<Protocol> {
    [MAJORITY_VOTING, MAJORITY_VOTING_BROKEN]
        .iter()
        .map(|src| parse_protocol(src.as_bytes()).expect("bundled protocol is valid"))
        .collect()
}

pub fn majority_voting() -> Protocol {
    parse_protocol(MAJORITY_VOTING.as_bytes()).expect("bundled protocol is valid")
}

pub fn majority_voting_broken() -> Protocol {
    parse_protocol(MAJORITY_VOTING_BROKEN.as_bytes()).expect("bundled protocol is valid")
}

/// URL-friendly identifier derived from a protocol name:
/// `"Majority Voting (broken)"` becomes `"majority-voting-broken"`.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

// ---------------------------------------------------------------------------
// Constraints, configurations, stage graphs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDoc {
    pub coeffs: BTreeMap<String, i64>,
    pub op: Relation,
    #[serde(rename = "const")]
    pub constant: i64,
}

pub fn constraint_to_doc(p: &Protocol, c: &LinearConstraint) -> ConstraintDoc {
    ConstraintDoc {
        coeffs: c
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(q, &a)| (p.states[q].clone(), a))
            .collect(),
        op: c.relation(),
        constant: c.constant(),
    }
}

pub fn constraint_from_doc(
    p: &Protocol,
    doc: &ConstraintDoc,
    field: &str,
) -> Result<LinearConstraint, IoError> {
    let mut coeffs = vec![0i64; p.num_states()];
    for (s, &a) in &doc.coeffs {
        let q = p.state(s).map_err(|_| {
            IoError::at(
                IoErrorCode::UnknownState,
                format!("{field}.coeffs.{s}"),
                format!("constraint refers to undeclared state \"{s}\""),
            )
        })?;
        coeffs[q] = a;
    }
    Ok(LinearConstraint::new(coeffs, doc.op, doc.constant))
}

pub fn constraints_to_doc(p: &Protocol, s: &ConstraintSet) -> Vec<ConstraintDoc> {
    s.constraints().iter().map(|c| constraint_to_doc(p, c)).collect()
}

pub fn config_to_doc(p: &Protocol, c: &Configuration) -> BTreeMap<String, u64> {
    p.config_to_map(c)
}

pub fn config_from_doc(
    p: &Protocol,
    doc: &BTreeMap<String, u64>,
    field: &str,
) -> Result<Configuration, IoError> {
    p.config_from_map(doc).map_err(|e| {
        let state = match &e {
            ModelError::UnknownState(s) => s.clone(),
            other => other.to_string(),
        };
        IoError::at(
            IoErrorCode::UnknownState,
            format!("{field}.{state}"),
            format!("configuration refers to undeclared state \"{state}\""),
        )
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageDoc {
    pub id: String,
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default)]
    pub certificate: Option<BTreeMap<String, u64>>,
    #[serde(default)]
    pub dead: Vec<String>,
    #[serde(default)]
    pub eventually_dead: Vec<String>,
    #[serde(default)]
    pub speed: Option<SpeedClass>,
    #[serde(default)]
    pub witness: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub parent: String,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageGraphDocument {
    #[serde(default)]
    pub format_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    pub output_value: u8,
    pub stages: Vec<StageDoc>,
    pub edges: Vec<EdgeDoc>,
}

fn transition_names(p: &Protocol, ts: &[usize]) -> Vec<String> {
    ts.iter().map(|&t| p.transitions[t].name.clone()).collect()
}

pub fn stage_graph_to_doc(p: &Protocol, g: &StageGraph) -> StageGraphDocument {
    StageGraphDocument {
        format_version: Some(FORMAT_VERSION),
        protocol: Some(p.name.clone()),
        output_value: g.output as u8,
        stages: g
            .stages
            .iter()
            .map(|s| StageDoc {
                id: s.id.clone(),
                constraints: constraints_to_doc(p, &s.constraint),
                certificate: s.certificate.as_ref().map(|c| {
                    c.weights()
                        .iter()
                        .enumerate()
                        .filter(|(_, &w)| w != 0)
                        .map(|(q, &w)| (p.states[q].clone(), w))
                        .collect()
                }),
                dead: transition_names(p, &s.dead),
                eventually_dead: transition_names(p, &s.eventually_dead),
                speed: s.speed,
                witness: s.witness.as_ref().map(|w| p.config_to_map(w)),
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|&(a, b)| EdgeDoc {
                parent: g.stages[a].id.clone(),
                child: g.stages[b].id.clone(),
            })
            .collect(),
    }
}

pub fn serialize_stage_graph(p: &Protocol, g: &StageGraph) -> String {
    to_canonical_string(&stage_graph_to_doc(p, g))
}

pub fn parse_stage_graph(p: &Protocol, text: &[u8]) -> Result<StageGraph, IoError> {
    let doc: StageGraphDocument = serde_json::from_slice(text).map_err(json_error)?;
    stage_graph_from_doc(p, &doc)
}

pub fn stage_graph_from_doc(p: &Protocol, doc: &StageGraphDocument) -> Result<StageGraph, IoError> {
    check_version(doc.format_version)?;
    let output = match doc.output_value {
        0 => false,
        1 => true,
        v => {
            return Err(IoError::at(
                IoErrorCode::BadOutputValue,
                "output_value",
                format!("output_value must be 0 or 1, got {v}"),
            ))
        }
    };
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut stages = Vec::with_capacity(doc.stages.len());
    for (i, sd) in doc.stages.iter().enumerate() {
        let field = format!("stages[{i}]");
        if index.insert(sd.id.as_str(), i).is_some() {
            return Err(IoError::at(
                IoErrorCode::DuplicateStage,
                format!("{field}.id"),
                format!("duplicate stage id \"{}\"", sd.id),
            ));
        }
        let constraints = sd
            .constraints
            .iter()
            .enumerate()
            .map(|(j, c)| constraint_from_doc(p, c, &format!("{field}.constraints[{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let certificate = match &sd.certificate {
            None => None,
            Some(w) => {
                let mut weights = vec![0u64; p.num_states()];
                for (s, &v) in w {
                    let q = p.state(s).map_err(|_| {
                        IoError::at(
                            IoErrorCode::UnknownState,
                            format!("{field}.certificate.{s}"),
                            format!("certificate refers to undeclared state \"{s}\""),
                        )
                    })?;
                    weights[q] = v;
                }
                Some(Certificate::new(weights).map_err(|m| {
                    IoError::at(IoErrorCode::BadCertificate, format!("{field}.certificate"), m)
                })?)
            }
        };
        let names = |list: &[String], what: &str| -> Result<Vec<usize>, IoError> {
            let mut out = Vec::new();
            for (j, n) in list.iter().enumerate() {
                let t = p.transition(n).map_err(|_| {
                    IoError::at(
                        IoErrorCode::UnknownTransition,
                        format!("{field}.{what}[{j}]"),
                        format!("unknown transition \"{n}\""),
                    )
                })?;
                out.push(t);
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        };
        let witness = match &sd.witness {
            None => None,
            Some(w) => Some(config_from_doc(p, w, &format!("{field}.witness"))?),
        };
        stages.push(Stage {
            id: sd.id.clone(),
            constraint: ConstraintSet::new(p.num_states(), constraints),
            certificate,
            dead: names(&sd.dead, "dead")?,
            eventually_dead: names(&sd.eventually_dead, "eventually_dead")?,
            speed: sd.speed,
            witness,
        });
    }
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (i, e) in doc.edges.iter().enumerate() {
        let find = |id: &str, what: &str| {
            index.get(id).copied().ok_or_else(|| {
                IoError::at(
                    IoErrorCode::UnknownStage,
                    format!("edges[{i}].{what}"),
                    format!("edge refers to unknown stage \"{id}\""),
                )
            })
        };
        edges.push((find(&e.parent, "parent")?, find(&e.child, "child")?));
    }
    StageGraph::new(output, stages, edges).map_err(|e| {
        let code = match e {
            crate::stage::StructureError::Cycle => IoErrorCode::CyclicGraph,
            crate::stage::StructureError::MultipleRoots(_) => IoErrorCode::MultipleRoots,
            crate::stage::StructureError::NoRoot => IoErrorCode::NoRoot,
            _ => IoErrorCode::Schema,
        };
        IoError::at(code, "edges", e.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_voting_parses() {
        let p = majority_voting();
        assert_eq!(p.num_states(), 4);
        assert_eq!(p.transitions.len(), 4);
        assert_eq!(p.predicate.coefficients, vec![1, -1, 0, 0]);
        assert_eq!(p.predicate.comparison, Comparison::Ge);
        assert_eq!(p.predicate.constant, 0);
    }

    #[test]
    fn examples_are_bundled() {
        let ex = load_examples();
        let mv = ex.iter().find(|p| p.name == "Majority Voting").unwrap();
        let broken = ex.iter().find(|p| p.name == "Majority Voting (broken)").unwrap();
        assert_eq!(mv.transitions.len(), 4);
        assert_eq!(broken.transitions.len(), 3);
        assert_eq!(mv.predicate, broken.predicate);
    }

    #[test]
    fn bundled_files_are_canonical() {
        assert_eq!(serialize_protocol(&majority_voting()), MAJORITY_VOTING);
        assert_eq!(serialize_protocol(&majority_voting_broken()), MAJORITY_VOTING_BROKEN);
    }

    #[test]
    fn empty_transition_list_is_valid() {
        let src = r#"{"name":"Idle","states":["q"],"initial":["q"],"output":{"q":1},
            "transitions":[],"predicate":{"coeffs":{},"op":">=","const":0}}"#;
        let p = parse_protocol(src.as_bytes()).unwrap();
        assert!(p.transitions.is_empty());
    }

    #[test]
    fn undeclared_state_is_named() {
        let src = r#"{"name":"Bad","states":["q"],"initial":["q"],"output":{"q":1},
            "transitions":[{"name":"t","pre":["q","q"],"post":["q","x"]}],
            "predicate":{"coeffs":{},"op":">=","const":0}}"#;
        let e = parse_protocol(src.as_bytes()).unwrap_err();
        assert_eq!(e.code, IoErrorCode::UnknownState);
        assert!(e.message.contains("\"x\""));
        assert_eq!(e.location.field.as_deref(), Some("transitions[0].post[1]"));
        assert_eq!(e.location.line, Some(2));
    }

    #[test]
    fn duplicate_pre_pair_rejected() {
        let src = r#"{"name":"Nd","states":["p","q"],"initial":["p"],"output":{"p":1,"q":0},
            "transitions":[{"name":"s","pre":["p","q"],"post":["p","p"]},
                           {"name":"t","pre":["q","p"],"post":["q","q"]}],
            "predicate":{"coeffs":{"p":1},"op":">=","const":0}}"#;
        let e = parse_protocol(src.as_bytes()).unwrap_err();
        assert_eq!(e.code, IoErrorCode::DuplicatePrePair);
        assert_eq!(e.location.field.as_deref(), Some("transitions[1].pre"));
    }

    #[test]
    fn predicate_over_non_initial_rejected() {
        let src = r#"{"name":"P","states":["p","q"],"initial":["p"],"output":{"p":1,"q":0},
            "transitions":[],"predicate":{"coeffs":{"q":1},"op":">=","const":0}}"#;
        let e = parse_protocol(src.as_bytes()).unwrap_err();
        assert_eq!(e.code, IoErrorCode::PredicateNonInitial);
    }

    #[test]
    fn modulo_predicate_rejected() {
        let src = r#"{"name":"P","states":["p"],"initial":["p"],"output":{"p":1},
            "transitions":[],"predicate":{"coeffs":{"p":1},"op":"mod2","const":0}}"#;
        let e = parse_protocol(src.as_bytes()).unwrap_err();
        assert_eq!(e.code, IoErrorCode::UnsupportedPredicate);
    }

    #[test]
    fn syntax_error_has_line() {
        let e = parse_protocol(b"{\n  \"name\": }").unwrap_err();
        assert_eq!(e.code, IoErrorCode::Syntax);
        assert_eq!(e.location.line, Some(2));
    }

    #[test]
    fn future_version_rejected() {
        let mut v: Value = serde_json::from_str(MAJORITY_VOTING).unwrap();
        v["format_version"] = 7.into();
        let e = parse_protocol(v.to_string().as_bytes()).unwrap_err();
        assert_eq!(e.code, IoErrorCode::UnsupportedVersion);
    }

    #[test]
    fn key_order_does_not_matter() {
        let a = r#"{"name":"T","states":["p","q"],"initial":["p","q"],"output":{"p":1,"q":0},
            "transitions":[{"name":"t","pre":["p","q"],"post":["p","p"]}],
            "predicate":{"coeffs":{"p":1,"q":-1},"op":">","const":0}}"#;
        let b = r#"{"predicate":{"const":0,"op":">","coeffs":{"q":-1,"p":1}},
            "transitions":[{"post":["p","p"],"pre":["p","q"],"name":"t"}],
            "output":{"q":0,"p":1},"initial":["p","q"],"states":["p","q"],"name":"T"}"#;
        let sa = serialize_protocol(&parse_protocol(a.as_bytes()).unwrap());
        let sb = serialize_protocol(&parse_protocol(b.as_bytes()).unwrap());
        assert_eq!(sa, sb);
        assert!(sa.ends_with("}\n"));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Majority Voting"), "majority-voting");
        assert_eq!(slug("Majority Voting (broken)"), "majority-voting-broken");
    }
}
