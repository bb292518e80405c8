//! Live-hand advisor over HTTP. A session mirrors one hand in the game
//! engine; clients post table events and ask for advice, and every answer
//! carries the exact prompt it was derived from.
//!
//! Routes (all JSON): `POST /v1/sessions`, `GET /v1/sessions/{id}`,
//! `POST /v1/sessions/{id}/events`, `POST /v1/sessions/{id}/advice`,
//! `GET /v1/sessions/{id}/prompt`.

mod error;
mod session;
mod store;

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use pokerlm_core::policies::{
    DecisionContext, EquityParams, EquityPolicy, Policy, PolicyDecision, RemoteConfig, RemotePolicy,
};
use pokerlm_core::prompt::action_label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

pub use error::{ApiError, ErrorBody};
pub use session::{AdvisorSpec, LegalView, LoggedEvent, Money, SeatSpec, SeatView, Session, SessionConfig, SessionEvent, Snapshot};
pub use store::EventStore;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Advisor for sessions that do not choose one.
    pub advisor: AdvisorSpec,
    pub decision_timeout: Duration,
    /// Directory for session logs; in-memory only when unset.
    pub store: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: ([127, 0, 0, 1], 8080).into(),
            advisor: AdvisorSpec::default(),
            decision_timeout: Duration::from_secs(10),
            store: None,
        }
    }
}

type SessionMap = HashMap<String, Arc<Mutex<Session>>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<SessionMap>>,
    store: Option<EventStore>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    /// Opens the store (if any) and restores its sessions.
    pub fn new(config: ServiceConfig) -> anyhow::Result<AppState> {
        let store = config.store.as_ref().map(EventStore::open).transpose()?;
        let mut sessions = SessionMap::new();
        if let Some(st) = &store {
            for s in st.load_all()? {
                sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
            }
            tracing::info!(restored = sessions.len(), "session store loaded");
        }
        Ok(AppState { sessions: Arc::new(RwLock::new(sessions)), store, config: Arc::new(config) })
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions.read().expect("session map lock").get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session))
        .route("/v1/sessions/{id}/events", post(post_event))
        .route("/v1/sessions/{id}/advice", post(get_advice))
        .route("/v1/sessions/{id}/prompt", get(get_prompt))
        .fallback(|| async { ApiError::bad_request("unknown route") })
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "advisor service listening");
    serve_listener(listener, AppState::new(config)?).await
}

/// Serves on an already bound listener (tests bind port 0).
pub async fn serve_listener(listener: tokio::net::TcpListener, state: AppState) -> anyhow::Result<()> {
    axum::serve(listener, router(state)).await?;
    Ok(())
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub constant_prompt: String,
    pub state: Snapshot,
}

async fn create_session(
    State(app): State<AppState>,
    payload: Result<Json<SessionConfig>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let config = body(payload)?;
    let mut sessions = app.sessions.write().expect("session map lock");
    let id = loop {
        let candidate = format!("s{:016x}", rand::rng().random::<u64>());
        if !sessions.contains_key(&candidate) {
            break candidate;
        }
    };
    let session = Session::new(id.clone(), config)?;
    if let Some(st) = &app.store {
        st.record_create(&session).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    let created = Created { session_id: id.clone(), constant_prompt: session.constant_block.clone(), state: session.snapshot() };
    sessions.insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(created)))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Snapshot>, ApiError> {
    let s = app.get(&id)?;
    let guard = s.lock().await;
    Ok(Json(guard.snapshot()))
}

async fn post_event(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<SessionEvent>, JsonRejection>,
) -> Result<Json<Snapshot>, ApiError> {
    let s = app.get(&id)?;
    let event = body(payload)?;
    let mut guard = s.lock().await;
    let logged = guard.apply(event, now_ms())?.clone();
    if let Some(st) = &app.store {
        st.record_event(&id, &logged).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    Ok(Json(guard.snapshot()))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PromptQuery {
    #[serde(default)]
    pub directive: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptBody {
    pub prompt: String,
}

async fn get_prompt(
    State(app): State<AppState>,
    Path(id): Path<String>,
    axum::extract::Query(q): axum::extract::Query<PromptQuery>,
) -> Result<Json<PromptBody>, ApiError> {
    let s = app.get(&id)?;
    let guard = s.lock().await;
    Ok(Json(PromptBody { prompt: guard.decision_point().render(q.directive.as_deref()) }))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AdviceRequest {
    /// Appended verbatim as the prompt's last line, e.g. "Please be aggressive."
    #[serde(default)]
    pub directive: Option<String>,
    /// Free-text question instead of action advice.
    #[serde(default)]
    pub question: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdviceStatus {
    Ok,
    /// The advisor failed; the suggestion is the safe default.
    Fallback,
    /// Nothing to advise (not the hero's turn, or the hand is over).
    NoAdvice,
    Answered,
    Unsupported,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdviceResponse {
    pub status: AdviceStatus,
    pub action: Option<String>,
    pub amount: Option<Money>,
    pub prompt: String,
    pub rationale: Option<String>,
    pub fallback: bool,
    pub answer: Option<String>,
}

fn session_seed(id: &str, events: usize) -> u64 {
    let mut h = DefaultHasher::new();
    (id, events).hash(&mut h);
    h.finish()
}

fn advice_from(status: AdviceStatus, d: PolicyDecision, prompt: String, rationale: Option<String>) -> AdviceResponse {
    AdviceResponse {
        fallback: status == AdviceStatus::Fallback,
        status,
        action: Some(action_label(d.kind).to_string()),
        amount: Some(Money(d.amount)),
        prompt,
        rationale,
        answer: None,
    }
}

async fn get_advice(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<AdviceRequest>, JsonRejection>,
) -> Result<Json<AdviceResponse>, ApiError> {
    let req = match payload {
        Err(JsonRejection::MissingJsonContentType(_)) => AdviceRequest::default(),
        other => body(other)?,
    };
    let s = app.get(&id)?;
    // snapshot under the lock, then query without holding it
    let (state, prompt, legal, hero, advisor, seed) = {
        let g = s.lock().await;
        let directive = req.question.as_deref().or(req.directive.as_deref());
        let prompt = g.decision_point().render(directive);
        (g.state.clone(), prompt, g.hero_legal(), g.config.hero_seat, g.advisor(&app.config.advisor), session_seed(&g.id, g.events.len()))
    };

    if let Some(question) = req.question {
        let AdvisorSpec::Remote { endpoint, retries } = advisor else {
            return Ok(Json(AdviceResponse {
                status: AdviceStatus::Unsupported,
                action: None,
                amount: None,
                prompt,
                rationale: None,
                fallback: false,
                answer: Some(format!("unsupported: the local advisor only recommends actions (question: {question})")),
            }));
        };
        let remote = RemotePolicy::new(RemoteConfig { endpoint, timeout: app.config.decision_timeout, retries });
        let (p, sid) = (prompt.clone(), id.clone());
        let answer = tokio::task::spawn_blocking(move || remote.ask(&p, &sid))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))?;
        return Ok(Json(match answer {
            Ok(text) => AdviceResponse {
                status: AdviceStatus::Answered,
                action: None,
                amount: None,
                prompt,
                rationale: None,
                fallback: false,
                answer: Some(text),
            },
            Err(e) => AdviceResponse {
                status: AdviceStatus::Unsupported,
                action: None,
                amount: None,
                prompt,
                rationale: Some(e.to_string()),
                fallback: true,
                answer: None,
            },
        }));
    }

    let Some(legal) = legal else {
        let reason = match state.to_act() {
            Some(seat) => format!("seat {seat} is to act"),
            None => "no decision is pending for the hero".to_string(),
        };
        return Ok(Json(AdviceResponse {
            status: AdviceStatus::NoAdvice,
            action: None,
            amount: None,
            prompt,
            rationale: Some(reason),
            fallback: false,
            answer: None,
        }));
    };

    let fallback = legal.safe_fallback();
    let (p, sid, l, limit) = (prompt.clone(), id.clone(), legal.clone(), app.config.decision_timeout);
    let task = tokio::task::spawn_blocking(move || match advisor {
        AdvisorSpec::Equity { samples } => {
            let policy = EquityPolicy { params: EquityParams { samples, ..EquityParams::default() } };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ctx = DecisionContext { state: &state, seat: hero, legal: &l, rng: &mut rng, session_id: &sid, directive: None };
            policy.decide(&mut ctx)
        }
        AdvisorSpec::Remote { endpoint, retries } => {
            let remote = RemotePolicy::new(RemoteConfig { endpoint, timeout: limit, retries });
            remote.decide_prompt(&p, &sid, &l)
        }
    });
    let out = match tokio::time::timeout(app.config.decision_timeout, task).await {
        Ok(Ok(out)) => out,
        Ok(Err(e)) => return Err(ApiError::internal(e.to_string())),
        Err(_) => {
            tracing::warn!(session = %id, "advisor timed out; suggesting fallback");
            return Ok(Json(advice_from(AdviceStatus::Fallback, fallback, prompt, Some("advisor timed out".into()))));
        }
    };
    let status = if out.fallback { AdviceStatus::Fallback } else { AdviceStatus::Ok };
    debug_assert!(legal.contains(out.decision.kind));
    Ok(Json(advice_from(status, out.decision, prompt, out.rationale)))
}
