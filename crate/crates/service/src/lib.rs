//! HTTP/JSON service (`lda/1`) hosting design sessions over one knowledge
//! base. Sessions live in memory; with a snapshot directory every decision
//! log is written after each decision and replayed on start.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use lda_core::api::{
    self, ApiError, CheckReport, DecisionOutcome, Envelope, FinalizeRequest, Health, PreviewRequest, SessionView,
};
use lda_core::canonical::to_canonical_string;
use lda_core::knowledge::{query_kb, KnowledgeBase, Query};
use lda_core::session::{apply_decision, diagnostics, open_session, replay, Decision, DesignSession, SessionError};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio::net::TcpListener;
use tokio::sync::{Mutex, RwLock};

type SessionCell = Arc<Mutex<DesignSession>>;

/// Shared service state. The knowledge base is immutable; each session has
/// its own lock so decisions on one session are applied in arrival order
/// while other sessions proceed in parallel.
pub struct AppState {
    kb: Arc<KnowledgeBase>,
    sessions: RwLock<HashMap<String, SessionCell>>,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(kb: KnowledgeBase, snapshot_dir: Option<PathBuf>) -> Arc<Self> {
        Arc::new(AppState { kb: Arc::new(kb), sessions: RwLock::new(HashMap::new()), snapshot_dir })
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    /// Replays every decision log in the snapshot directory. Returns the
    /// number of sessions restored.
    pub async fn restore(&self) -> io::Result<usize> {
        let Some(dir) = &self.snapshot_dir else { return Ok(0) };
        tokio::fs::create_dir_all(dir).await?;
        let mut entries = tokio::fs::read_dir(dir).await?;
        let mut restored = 0;
        while let Some(entry) = entries.next_entry().await? {
            let path = entry.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(String::from) else { continue };
            let text = tokio::fs::read_to_string(&path).await?;
            let log: Vec<Decision> = serde_json::from_str(&text)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            let session = replay(&self.kb, &log)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            self.sessions.write().await.insert(id, Arc::new(Mutex::new(session)));
            restored += 1;
        }
        Ok(restored)
    }

    async fn session(&self, id: &str) -> Result<SessionCell, Failure> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| Failure(StatusCode::NOT_FOUND, ApiError::new("unknown-session", format!("no session `{id}`"))))
    }

    async fn snapshot(&self, id: &str, session: &DesignSession) -> Result<(), Failure> {
        let Some(dir) = &self.snapshot_dir else { return Ok(()) };
        write_snapshot(dir, id, &session.log).await.map_err(|e| {
            tracing::error!("snapshot of {id} failed: {e}");
            Failure(StatusCode::INTERNAL_SERVER_ERROR, ApiError::new("snapshot-failed", e.to_string()))
        })
    }
}

async fn write_snapshot(dir: &Path, id: &str, log: &[Decision]) -> io::Result<()> {
    let tmp = dir.join(format!(".{id}.tmp"));
    tokio::fs::write(&tmp, lda_core::canonical::to_canonical_file(log)).await?;
    tokio::fs::rename(&tmp, dir.join(format!("{id}.json"))).await
}

struct Failure(StatusCode, ApiError);

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        reply::<()>(self.0, &Envelope::failure(self.1))
    }
}

fn reply<T: Serialize>(status: StatusCode, envelope: &Envelope<T>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], to_canonical_string(envelope)).into_response()
}

fn ok<T: Serialize>(data: T) -> Response {
    reply(StatusCode::OK, &Envelope::success(data))
}

fn unprocessable(e: ApiError) -> Failure {
    Failure(StatusCode::UNPROCESSABLE_ENTITY, e)
}

/// Parses a JSON body; an empty body stands for `default` when given.
fn body<T: DeserializeOwned>(bytes: &Bytes, default: Option<T>) -> Result<T, Failure> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        if let Some(d) = default {
            return Ok(d);
        }
    }
    serde_json::from_slice(bytes).map_err(|e| Failure(StatusCode::BAD_REQUEST, ApiError::new("bad-request", e.to_string())))
}

type Shared = State<Arc<AppState>>;

async fn create_session(State(st): Shared) -> Result<Response, Failure> {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = open_session(&st.kb);
    st.snapshot(&id, &session).await?;
    st.sessions.write().await.insert(id.clone(), Arc::new(Mutex::new(session.clone())));
    tracing::info!("opened session {id}");
    Ok(ok(SessionView { session_id: id, session }))
}

async fn get_session(State(st): Shared, UrlPath(id): UrlPath<String>) -> Result<Response, Failure> {
    let cell = st.session(&id).await?;
    let session = cell.lock().await.clone();
    Ok(ok(SessionView { session_id: id, session }))
}

async fn post_decision(State(st): Shared, UrlPath(id): UrlPath<String>, bytes: Bytes) -> Result<Response, Failure> {
    let cell = st.session(&id).await?;
    let decision: Decision = body(&bytes, None)?;
    let mut guard = cell.lock().await;
    let update = apply_decision(&st.kb, &guard, decision).map_err(|e| {
        let status = match e {
            SessionError::StaleSequence { .. } => StatusCode::CONFLICT,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Failure(status, ApiError::domain(&e))
    })?;
    st.snapshot(&id, &update.session).await?;
    *guard = update.session.clone();
    Ok(ok(DecisionOutcome { session_id: id, session: update.session, delta: update.delta }))
}

async fn get_diagnostics(State(st): Shared, UrlPath(id): UrlPath<String>) -> Result<Response, Failure> {
    let cell = st.session(&id).await?;
    let session = cell.lock().await.clone();
    Ok(ok(CheckReport::new(&session, diagnostics(&st.kb, &session))))
}

async fn post_finalize(State(st): Shared, UrlPath(id): UrlPath<String>, bytes: Bytes) -> Result<Response, Failure> {
    let cell = st.session(&id).await?;
    let req: FinalizeRequest = body(&bytes, Some(FinalizeRequest::default()))?;
    let session = cell.lock().await.clone();
    Ok(ok(api::finalize_session(&st.kb, &session, &req).map_err(unprocessable)?))
}

async fn post_preview(State(st): Shared, UrlPath(id): UrlPath<String>, bytes: Bytes) -> Result<Response, Failure> {
    let cell = st.session(&id).await?;
    let req: PreviewRequest = body(&bytes, None)?;
    let session = cell.lock().await.clone();
    match api::preview(&st.kb, &session, &req) {
        Ok(p) => Ok(ok(p)),
        Err(e) if e.code == "round-trip-failure" => Err(Failure(StatusCode::INTERNAL_SERVER_ERROR, e)),
        Err(e) => Err(unprocessable(e)),
    }
}

async fn kb_concepts(State(st): Shared) -> Response {
    ok(api::concepts(&st.kb))
}

async fn kb_query(State(st): Shared, bytes: Bytes) -> Result<Response, Failure> {
    let q: Query = body(&bytes, None)?;
    Ok(ok(query_kb(&st.kb, &q).map_err(|e| unprocessable(ApiError::domain(&e)))?))
}

async fn health(State(st): Shared) -> Response {
    let sessions = st.sessions.read().await.len();
    ok(Health { status: "ok".into(), kb_ref: st.kb.content_hash(), sessions })
}

async fn not_found() -> Failure {
    Failure(StatusCode::NOT_FOUND, ApiError::new("not-found", "no such endpoint"))
}

async fn method_not_allowed() -> Failure {
    Failure(StatusCode::METHOD_NOT_ALLOWED, ApiError::new("method-not-allowed", "method not allowed on this endpoint"))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/decisions", post(post_decision))
        .route("/sessions/{id}/diagnostics", get(get_diagnostics))
        .route("/sessions/{id}/finalize", post(post_finalize))
        .route("/sessions/{id}/preview", post(post_preview))
        .route("/kb/concepts", get(kb_concepts))
        .route("/kb/query", post(kb_query))
        .route("/health", get(health))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

/// Serves until ctrl-c (or SIGTERM on unix).
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> io::Result<()> {
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown()).await
}

async fn shutdown() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        if let Ok(mut term) = signal(SignalKind::terminate()) {
            tokio::select! {
                _ = tokio::signal::ctrl_c() => {}
                _ = term.recv() => {}
            }
            return;
        }
    }
    let _ = tokio::signal::ctrl_c().await;
}
