//! HTTP service over protocols, verification and simulation sessions.
//!
//! Handlers are thin adapters over the library. The protocol store is
//! replaced as a whole on upload, so readers never block each other; each
//! session sits behind its own lock.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::io::{
    config_from_doc, constraints_to_doc, load_examples, parse_protocol, protocol_value, slug,
    stage_graph_to_doc, ConstraintDoc, IoError, StageGraphDocument,
};
use crate::model::Protocol;
use crate::oracle::{ExploreOptions, OracleError, DEFAULT_NODE_BUDGET};
use crate::report::{verification_to_doc, OutcomeKind, VerificationDocument};
use crate::session::{Session, SessionError, SessionSnapshot, StepCommand, StepMode};
use crate::stage::{StageError, StageGraph};
use crate::synthesis::{synthesize, Outcome, SynthesisOptions};

/// Environment variable overriding the exploration node budget.
pub const BUDGET_ENV: &str = "STAGECRAFT_BUDGET_NODES";
pub const DEFAULT_VERIFY_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_PROGRESS_STEPS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    pub location: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.into(),
            message: message.into(),
            location: None,
        }
    }

    fn at(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} `{id}`"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<IoError> for ApiError {
    fn from(e: IoError) -> Self {
        let location = e.location.field.clone().or_else(|| {
            e.location
                .line
                .map(|l| format!("line {l}, column {}", e.location.column.unwrap_or(0)))
        });
        ApiError {
            status: StatusCode::BAD_REQUEST.as_u16(),
            code: e.code.as_str().into(),
            message: e.message,
            location,
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let code = match &e {
            SessionError::Model(_) => "model_error",
            SessionError::Placement(_) => "ambiguous_placement",
            SessionError::NoCertificate => "no_certificate",
            SessionError::PairNotPresent(..) => "pair_not_present",
            SessionError::OutOfRange { .. } => "out_of_range",
            SessionError::ZeroRepeat => "invalid_repeat",
            SessionError::BadSnapshot(_) => "bad_snapshot",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<StageError> for ApiError {
    fn from(e: StageError) -> Self {
        match e {
            StageError::Oracle(OracleError::Budget { .. }) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "budget_exhausted", e.to_string())
            }
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "engine_error", other.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApiConfig {
    pub protocol_dir: Option<PathBuf>,
    pub node_budget: usize,
    pub verify_timeout: Duration,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            protocol_dir: None,
            node_budget: DEFAULT_NODE_BUDGET,
            verify_timeout: DEFAULT_VERIFY_TIMEOUT,
        }
    }
}

impl ApiConfig {
    /// Applies [`BUDGET_ENV`] when it is set to a positive integer.
    pub fn with_env(mut self) -> Self {
        if let Some(n) = std::env::var(BUDGET_ENV).ok().and_then(|v| v.parse().ok()) {
            if n > 0 {
                self.node_budget = n;
            }
        }
        self
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("cannot read protocol directory {}: {source}", .path.display())]
    Directory {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Protocol { path: PathBuf, source: IoError },
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
}

/// Verification result kept per protocol.
struct Verified {
    doc: VerificationDocument,
    graphs: Arc<Vec<StageGraph>>,
}

type Store = Arc<BTreeMap<String, Arc<Protocol>>>;

pub struct AppState {
    config: ApiConfig,
    protocols: RwLock<Store>,
    verified: Mutex<HashMap<String, Arc<Verified>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_session: AtomicU64,
}

impl AppState {
    /// Loads the bundled examples and every `*.json` file of the protocol
    /// directory. A malformed file aborts with its path.
    pub fn load(config: ApiConfig) -> Result<Self, StartupError> {
        let mut store = BTreeMap::new();
        for p in load_examples() {
            store.insert(slug(&p.name), Arc::new(p));
        }
        if let Some(dir) = &config.protocol_dir {
            for p in load_dir(dir)? {
                store.insert(slug(&p.name), Arc::new(p));
            }
        }
        Ok(AppState {
            config,
            protocols: RwLock::new(Arc::new(store)),
            verified: Mutex::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
            next_session: AtomicU64::new(1),
        })
    }

    fn store(&self) -> Store {
        Arc::clone(&self.protocols.read().expect("store lock"))
    }

    fn protocol(&self, id: &str) -> Result<Arc<Protocol>, ApiError> {
        self.store()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("protocol", id))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn synthesis_options(&self) -> SynthesisOptions {
        SynthesisOptions {
            explore: ExploreOptions {
                node_budget: self.config.node_budget,
            },
            deadline: Some(Instant::now() + self.config.verify_timeout),
            ..SynthesisOptions::default()
        }
    }
}

fn load_dir(dir: &Path) -> Result<Vec<Protocol>, StartupError> {
    let read_err = |source| StartupError::Directory {
        path: dir.to_owned(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(read_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let bytes = std::fs::read(&path).map_err(read_err)?;
        let p = parse_protocol(&bytes).map_err(|source| StartupError::Protocol {
            path: path.clone(),
            source,
        })?;
        out.push(p);
    }
    Ok(out)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/protocols", get(list_protocols).post(create_protocol))
        .route("/api/protocols/:id", get(get_protocol))
        .route("/api/protocols/:id/verify", post(verify))
        .route("/api/protocols/:id/stage-graphs", get(stage_graphs))
        .route("/api/protocols/:id/stages/:sid", get(stage_details))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/:id", get(get_session))
        .route("/api/sessions/:id/step", post(step_session))
        .route("/api/sessions/:id/seek", post(seek_session))
        .route("/api/sessions/:id/progress", post(progress_session))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, config: ApiConfig) -> Result<(), StartupError> {
    let state = Arc::new(AppState::load(config)?);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| StartupError::Bind { addr, source })?;
    tracing::info!(%addr, protocols = state.store().len(), "listening");
    axum::serve(listener, router(state))
        .await
        .map_err(|source| StartupError::Bind { addr, source })
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub id: String,
    pub name: String,
    pub description: Option<String>,
    pub states: usize,
    pub transitions: usize,
}

fn summary(id: &str, p: &Protocol) -> ProtocolSummary {
    ProtocolSummary {
        id: id.into(),
        name: p.name.clone(),
        description: p.description.clone(),
        states: p.num_states(),
        transitions: p.transitions.len(),
    }
}

async fn list_protocols(State(st): State<Arc<AppState>>) -> Json<Vec<ProtocolSummary>> {
    Json(st.store().iter().map(|(id, p)| summary(id, p)).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolResponse {
    pub id: String,
    pub protocol: Value,
}

async fn get_protocol(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<ProtocolResponse> {
    let p = st.protocol(&id)?;
    Ok(Json(ProtocolResponse {
        protocol: protocol_value(&p),
        id,
    }))
}

async fn create_protocol(
    State(st): State<Arc<AppState>>,
    body: Bytes,
) -> Result<(StatusCode, Json<ProtocolResponse>), ApiError> {
    let p = parse_protocol(&body)?;
    let id = slug(&p.name);
    if id.is_empty() {
        return Err(ApiError::bad_request("protocol name yields an empty id").at("name"));
    }
    let mut guard = st.protocols.write().expect("store lock");
    if let Some(existing) = guard.get(&id) {
        if **existing == p {
            return Ok((
                StatusCode::OK,
                Json(ProtocolResponse {
                    protocol: protocol_value(&p),
                    id,
                }),
            ));
        }
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "protocol_exists",
            format!("a different protocol with id `{id}` exists"),
        )
        .at("name"));
    }
    let mut next = (**guard).clone();
    next.insert(id.clone(), Arc::new(p.clone()));
    *guard = Arc::new(next);
    Ok((
        StatusCode::CREATED,
        Json(ProtocolResponse {
            protocol: protocol_value(&p),
            id,
        }),
    ))
}

/// Runs or reuses the verification of a protocol. Results that ran into the
/// time budget are not cached.
async fn verified(st: &Arc<AppState>, id: &str) -> Result<Arc<Verified>, ApiError> {
    let p = st.protocol(id)?;
    if let Some(v) = st.verified.lock().expect("cache lock").get(id) {
        return Ok(Arc::clone(v));
    }
    let opts = st.synthesis_options();
    let worker = Arc::clone(&p);
    let job = tokio::task::spawn_blocking(move || synthesize(&worker, opts));
    // the synthesizer honours the deadline between candidates; the extra
    // margin covers a single long certificate check
    let limit = st.config.verify_timeout + Duration::from_secs(5);
    let result = match tokio::time::timeout(limit, job).await {
        Err(_) => {
            return Err(ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "budget_exhausted",
                format!("verification exceeded {} s", limit.as_secs()),
            ))
        }
        Ok(Err(join)) => {
            return Err(ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal",
                join.to_string(),
            ))
        }
        Ok(Ok(r)) => r?,
    };
    let v = Arc::new(Verified {
        doc: verification_to_doc(&p, &result),
        graphs: Arc::new(result.graphs.iter().map(|g| g.graph.clone()).collect()),
    });
    let timed_out = matches!(&result.outcome, Outcome::Inconclusive(r) if r.contains("time budget"));
    if !timed_out {
        st.verified
            .lock()
            .expect("cache lock")
            .insert(id.to_owned(), Arc::clone(&v));
    }
    Ok(v)
}

async fn verify(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<VerificationDocument> {
    Ok(Json(verified(&st, &id).await?.doc.clone()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageGraphsResponse {
    pub protocol: String,
    pub outcome: OutcomeKind,
    pub graphs: Vec<StageGraphDocument>,
}

async fn stage_graphs(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<StageGraphsResponse> {
    let v = verified(&st, &id).await?;
    Ok(Json(StageGraphsResponse {
        protocol: id,
        outcome: v.doc.outcome.clone(),
        graphs: v.doc.graphs.iter().map(|g| g.stage_graph.clone()).collect(),
    }))
}

#[derive(Debug, Deserialize)]
struct StageQuery {
    config: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageDetails {
    pub id: String,
    pub output_value: u8,
    pub constraints: Vec<ConstraintDoc>,
    /// Human-readable form of each constraint.
    pub constraints_text: Vec<String>,
    pub certificate: Option<BTreeMap<String, u64>>,
    pub certificate_text: Option<String>,
    pub dead: Vec<String>,
    pub eventually_dead: Vec<String>,
    pub speed: Option<String>,
    pub witness: Option<BTreeMap<String, u64>>,
    pub parents: Vec<String>,
    pub children: Vec<String>,
    /// The queried configuration, when one was given.
    pub config: Option<BTreeMap<String, u64>>,
    pub contains_config: Option<bool>,
    pub certificate_value: Option<u64>,
}

async fn stage_details(
    State(st): State<Arc<AppState>>,
    UrlPath((id, sid)): UrlPath<(String, String)>,
    Query(q): Query<StageQuery>,
) -> ApiResult<StageDetails> {
    let p = st.protocol(&id)?;
    let v = verified(&st, &id).await?;
    let (g, i) = v
        .graphs
        .iter()
        .find_map(|g| g.find(&sid).map(|i| (g, i)))
        .ok_or_else(|| ApiError::not_found("stage", &sid))?;
    let stage = &g.stages[i];
    let doc = stage_graph_to_doc(&p, g);
    let sdoc = doc.stages.into_iter().nth(i).expect("stage index in range");
    let config = match &q.config {
        None => None,
        Some(text) => {
            let map: BTreeMap<String, u64> = serde_json::from_str(text)
                .map_err(|e| ApiError::bad_request(format!("config is not a state-count object: {e}")).at("config"))?;
            Some(config_from_doc(&p, &map, "config")?)
        }
    };
    let names = |v: Vec<usize>| v.into_iter().map(|k| g.stages[k].id.clone()).collect();
    Ok(Json(StageDetails {
        id: sid,
        output_value: g.output as u8,
        constraints: constraints_to_doc(&p, &stage.constraint),
        constraints_text: stage
            .constraint
            .constraints()
            .iter()
            .map(|c| c.display(&p).to_string())
            .collect(),
        certificate: sdoc.certificate,
        certificate_text: stage.certificate.as_ref().map(|f| f.display(&p)),
        dead: sdoc.dead,
        eventually_dead: sdoc.eventually_dead,
        speed: stage.speed.map(|s| s.to_string()),
        witness: sdoc.witness,
        parents: names(g.parents(i)),
        children: names(g.children(i)),
        contains_config: config.as_ref().map(|c| stage.constraint.satisfies(c)),
        certificate_value: config
            .as_ref()
            .and_then(|c| stage.certificate.as_ref().map(|f| f.value(c))),
        config: config.as_ref().map(|c| p.config_to_map(c)),
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub run_length: usize,
    #[serde(flatten)]
    pub snapshot: SessionSnapshot,
}

fn view(id: &str, s: &Session) -> SessionView {
    SessionView {
        id: id.into(),
        run_length: s.run().len(),
        snapshot: s.snapshot(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    protocol: String,
    config: BTreeMap<String, u64>,
    seed: Option<u64>,
}

fn json_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    if body.is_empty() {
        return serde_json::from_slice(b"{}").map_err(|e| ApiError::bad_request(e.to_string()));
    }
    serde_json::from_slice(body).map_err(|e| {
        ApiError::bad_request(e.to_string()).at(format!("line {}, column {}", e.line(), e.column()))
    })
}

async fn create_session(
    State(st): State<Arc<AppState>>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req: CreateSession = json_body(&body)?;
    let p = st.protocol(&req.protocol)?;
    let c0 = config_from_doc(&p, &req.config, "config")?;
    if c0.size() == 0 {
        return Err(ApiError::bad_request("configuration is empty").at("config"));
    }
    let v = verified(&st, &req.protocol).await?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let session = Session::new(p, Arc::clone(&v.graphs), c0, seed)?;
    let id = format!("s{}", st.next_session.fetch_add(1, Ordering::Relaxed));
    let out = view(&id, &session);
    st.sessions
        .write()
        .expect("session table lock")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(out)))
}

async fn get_session(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<SessionView> {
    let s = st.session(&id)?;
    let guard = s.lock().expect("session lock");
    Ok(Json(view(&id, &guard)))
}

fn check_version(s: &Session, expected: Option<usize>) -> Result<(), ApiError> {
    match expected {
        Some(n) if n != s.run().len() => Err(ApiError::new(
            StatusCode::CONFLICT,
            "version_conflict",
            format!("expected run length {n}, session has {}", s.run().len()),
        )
        .at("expected_run_length")),
        _ => Ok(()),
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeDoc {
    Manual,
    Random,
    Progress,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRequest {
    mode: ModeDoc,
    pair: Option<(String, String)>,
    #[serde(default = "one")]
    repeat: u32,
    expected_run_length: Option<usize>,
}

fn one() -> u32 {
    1
}

async fn step_session(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<SessionView> {
    let req: StepRequest = json_body(&body)?;
    let s = st.session(&id)?;
    let mut guard = s.lock().expect("session lock");
    check_version(&guard, req.expected_run_length)?;
    let mode = match req.mode {
        ModeDoc::Random => StepMode::Random,
        ModeDoc::Progress => StepMode::Progress,
        ModeDoc::Manual => {
            let (a, b) = req
                .pair
                .ok_or_else(|| ApiError::bad_request("manual steps need a pair").at("pair"))?;
            let p = guard.protocol();
            let state = |name: &str, k: usize| {
                p.state(name).map_err(|e| ApiError::bad_request(e.to_string()).at(format!("pair[{k}]")))
            };
            StepMode::Manual(state(&a, 0)?, state(&b, 1)?)
        }
    };
    guard.step(StepCommand {
        mode,
        repeat: req.repeat,
    })?;
    Ok(Json(view(&id, &guard)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeekRequest {
    index: usize,
    expected_run_length: Option<usize>,
}

async fn seek_session(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<SessionView> {
    let req: SeekRequest = json_body(&body)?;
    let s = st.session(&id)?;
    let mut guard = s.lock().expect("session lock");
    check_version(&guard, req.expected_run_length)?;
    guard.seek(req.index)?;
    Ok(Json(view(&id, &guard)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgressRequest {
    max_steps: Option<u64>,
    expected_run_length: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgressResponse {
    pub steps: u64,
    pub reached: bool,
    pub from_stage: String,
    pub to_stage: Option<String>,
    pub session: SessionView,
}

async fn progress_session(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<ProgressResponse> {
    let req: ProgressRequest = json_body(&body)?;
    let s = st.session(&id)?;
    let mut guard = s.lock().expect("session lock");
    check_version(&guard, req.expected_run_length)?;
    let r = guard.progress_to_child(req.max_steps.unwrap_or(DEFAULT_PROGRESS_STEPS))?;
    Ok(Json(ProgressResponse {
        steps: r.steps,
        reached: r.reached,
        from_stage: r.from.1,
        to_stage: r.to,
        session: view(&id, &guard),
    }))
}
