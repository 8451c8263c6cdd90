//! HTTP API for interactive exchange-graph sessions.
//!
//! Routes, all under `/api/v1`:
//!
//! | method | path | body / query | response |
//! |---|---|---|---|
//! | GET | `/health` | | `{"status":"ok"}` |
//! | POST | `/sessions` | `{"backend":"coh","weights":"(2,3)","window":"auto"}` or `{"backend":"dynkin","quiver":"A3"}` | `201 {"id", "state"}` |
//! | GET | `/sessions/{id}` | | state |
//! | DELETE | `/sessions/{id}` | | `204` |
//! | POST | `/sessions/{id}/mutate` | `{"index":k}` | state |
//! | POST | `/sessions/{id}/undo` | | state |
//! | GET | `/sessions/{id}/neighborhood` | `?depth=d` | graph document |
//! | POST | `/sessions/{id}/reach` | `{"m":"S1","n":"S2"}` | `{"chain","edges","verified"}` |
//! | GET | `/sessions/{id}/export` | `?format=dot\|json&depth=d` | text |
//!
//! A state is `{"backend", "elements", "matrix", "depth", "exchanged"}` where
//! `exchanged` is `{"index","out","in"}` for the last mutation. Graph
//! documents are `{"nodes":[{"key","elements"}],"edges":[{"a","b","out","in"}],"frontier":[key]}`.
//! Errors are `{"error":{"code","message"}}` with status 400 (bad
//! arguments), 404 (unknown session) or 409 (mutation or search failed;
//! `code` is machine readable, e.g. `complement_not_in_window`).

pub mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

pub use session::{ApiError, CreateRequest, Session, StateView};

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not_found", m),
            ApiError::Conflict { reason, message } => (StatusCode::CONFLICT, reason, message),
        };
        (status, Json(json!({ "error": { "code": code, "message": message } }))).into_response()
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub idle_timeout: Duration,
    pub cors_origins: Vec<String>,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            idle_timeout: Duration::from_secs(30 * 60),
            cors_origins: vec!["http://localhost:5173".into(), "http://127.0.0.1:5173".into()],
            static_dir: None,
        }
    }
}

struct Entry {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

/// In-memory sessions. Each session has its own lock, so requests to one
/// session are serialized while different sessions proceed independently.
#[derive(Clone)]
pub struct SessionStore {
    entries: Arc<Mutex<HashMap<String, Entry>>>,
    next_id: Arc<AtomicU64>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub fn new(idle_timeout: Duration) -> Self {
        SessionStore {
            entries: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
            idle_timeout,
        }
    }

    pub fn insert(&self, session: Session) -> String {
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let entry = Entry { session: Arc::new(Mutex::new(session)), last_used: Instant::now() };
        self.entries.lock().expect("store lock").insert(id.clone(), entry);
        id
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let mut entries = self.entries.lock().expect("store lock");
        let entry = entries.get_mut(id).ok_or_else(|| ApiError::NotFound(format!("no session {id:?}")))?;
        entry.last_used = Instant::now();
        Ok(entry.session.clone())
    }

    pub fn remove(&self, id: &str) -> bool {
        self.entries.lock().expect("store lock").remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the timeout as of `now`.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let mut entries = self.entries.lock().expect("store lock");
        let before = entries.len();
        entries.retain(|_, e| now.saturating_duration_since(e.last_used) <= self.idle_timeout);
        before - entries.len()
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid JSON body: {e}")))
}

/// Runs `f` on the session off the async executor, holding its lock.
async fn with_session<T: Send + 'static>(
    store: &SessionStore,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    let session = store.get(id)?;
    tokio::task::spawn_blocking(move || f(&mut session.lock().expect("session lock")))
        .await
        .map_err(|e| ApiError::BadRequest(format!("request aborted: {e}")))?
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn create(State(store): State<SessionStore>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let session = tokio::task::spawn_blocking(move || Session::create(&req))
        .await
        .map_err(|e| ApiError::BadRequest(format!("request aborted: {e}")))??;
    let state = session.state();
    let id = store.insert(session);
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "state": state }))).into_response())
}

async fn get_state(State(store): State<SessionStore>, Path(id): Path<String>) -> Result<Json<StateView>, ApiError> {
    with_session(&store, &id, |s| Ok(s.state())).await.map(Json)
}

async fn delete(State(store): State<SessionStore>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::NotFound(format!("no session {id:?}")))
    }
}

#[derive(Deserialize)]
struct MutateRequest {
    index: usize,
}

async fn mutate(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<StateView>, ApiError> {
    let req: MutateRequest = parse_body(&body)?;
    with_session(&store, &id, move |s| s.mutate(req.index)).await.map(Json)
}

async fn undo(State(store): State<SessionStore>, Path(id): Path<String>) -> Result<Json<StateView>, ApiError> {
    with_session(&store, &id, |s| s.undo()).await.map(Json)
}

#[derive(Deserialize)]
struct GraphQuery {
    depth: Option<usize>,
    format: Option<String>,
}

async fn neighborhood(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    Query(q): Query<GraphQuery>,
) -> Result<Response, ApiError> {
    let depth = q.depth.unwrap_or(1);
    let doc = with_session(&store, &id, move |s| s.neighborhood(depth)).await?;
    Ok(Json(doc).into_response())
}

#[derive(Deserialize)]
struct ReachRequest {
    m: String,
    n: String,
}

async fn reach(State(store): State<SessionStore>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let req: ReachRequest = parse_body(&body)?;
    let view = with_session(&store, &id, move |s| s.reach(&req.m, &req.n)).await?;
    Ok(Json(view).into_response())
}

async fn export(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    Query(q): Query<GraphQuery>,
) -> Result<Response, ApiError> {
    let format = q.format.unwrap_or_else(|| "json".into());
    let depth = q.depth.unwrap_or(1);
    let content_type = if format == "dot" { "text/vnd.graphviz" } else { "application/json" };
    let text = with_session(&store, &id, move |s| s.export(&format, depth)).await?;
    Ok(([(header::CONTENT_TYPE, content_type)], text).into_response())
}

pub fn router(store: SessionStore, config: &ServerConfig) -> Router {
    let origins: Vec<HeaderValue> =
        config.cors_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST, Method::DELETE])
        .allow_headers([header::CONTENT_TYPE]);
    let api = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(get_state).delete(delete))
        .route("/sessions/{id}/mutate", post(mutate))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/neighborhood", get(neighborhood))
        .route("/sessions/{id}/reach", post(reach))
        .route("/sessions/{id}/export", get(export))
        .with_state(store);
    let app = Router::new().nest("/api/v1", api);
    let app = match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    };
    app.layer(cors)
}

/// Serves until the process is stopped, evicting idle sessions periodically.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let store = SessionStore::new(config.idle_timeout);
    let sweeper = store.clone();
    let period = (config.idle_timeout / 4).max(Duration::from_secs(1));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sweeper.evict_idle(Instant::now());
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store, &config)).await
}
