//! Async client for the `lda/1` service API.

use lda_core::api::{
    ApiError, CheckReport, ConceptSummary, DecisionOutcome, Envelope, FinalizeRequest, FinalizeResult, Health,
    PreviewRequest, PreviewResult, SessionView,
};
use lda_core::knowledge::{ConceptId, Query};
use lda_core::session::Decision;
use reqwest::Method;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("cannot reach the service: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error envelope.
    #[error("{error} (HTTP {status})")]
    Api { status: u16, error: ApiError },
    #[error("malformed response (HTTP {status}): {message}")]
    BadResponse { status: u16, message: String },
}

impl ClientError {
    /// The API error carried by the response, if any.
    pub fn api_error(&self) -> Option<&ApiError> {
        match self {
            ClientError::Api { error, .. } => Some(error),
            _ => None,
        }
    }

    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api { status, .. } | ClientError::BadResponse { status, .. } => Some(*status),
            ClientError::Transport(e) => e.status().map(|s| s.as_u16()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        Client { base: base.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn call<T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&(impl Serialize + ?Sized)>,
    ) -> Result<T, ClientError> {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req.send().await?;
        let status = resp.status().as_u16();
        let text = resp.text().await?;
        let envelope: Envelope<T> = Envelope::from_json(&text)
            .map_err(|e| ClientError::BadResponse { status, message: e.message })?;
        envelope.into_result().map_err(|error| ClientError::Api { status, error })
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        self.call(Method::GET, path, None::<&()>).await
    }

    async fn post<T: DeserializeOwned>(&self, path: &str, body: &(impl Serialize + ?Sized)) -> Result<T, ClientError> {
        self.call(Method::POST, path, Some(body)).await
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        self.get("/health").await
    }

    pub async fn create_session(&self) -> Result<SessionView, ClientError> {
        self.call(Method::POST, "/sessions", None::<&()>).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionView, ClientError> {
        self.get(&format!("/sessions/{id}")).await
    }

    pub async fn decide(&self, id: &str, decision: &Decision) -> Result<DecisionOutcome, ClientError> {
        self.post(&format!("/sessions/{id}/decisions"), decision).await
    }

    pub async fn diagnostics(&self, id: &str) -> Result<CheckReport, ClientError> {
        self.get(&format!("/sessions/{id}/diagnostics")).await
    }

    pub async fn finalize(&self, id: &str, req: &FinalizeRequest) -> Result<FinalizeResult, ClientError> {
        self.post(&format!("/sessions/{id}/finalize"), req).await
    }

    pub async fn preview(&self, id: &str, req: &PreviewRequest) -> Result<PreviewResult, ClientError> {
        self.post(&format!("/sessions/{id}/preview"), req).await
    }

    pub async fn concepts(&self) -> Result<Vec<ConceptSummary>, ClientError> {
        self.get("/kb/concepts").await
    }

    pub async fn query(&self, q: &Query) -> Result<Vec<ConceptId>, ClientError> {
        self.post("/kb/query", q).await
    }

    /// Opens a session and applies `log` in order.
    pub async fn replay(&self, log: &[Decision]) -> Result<SessionView, ClientError> {
        let view = self.create_session().await?;
        let id = view.session_id.clone();
        let mut last = view;
        for d in log {
            let out = self.decide(&id, d).await?;
            last = SessionView { session_id: out.session_id, session: out.session };
        }
        Ok(last)
    }
}
