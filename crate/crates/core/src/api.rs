//! Payloads of the `lda/1` HTTP API, shared by the service, the client and
//! the CLI so that every front door produces the same JSON for the same
//! operation.

use std::fmt::Display;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::knowledge::{ConceptId, ConceptKind, KnowledgeBase};
use crate::metalang::{compile_design, LanguageDescription};
use crate::session::{finalize, DesignSession, DiagnosticsReport, LanguageDesign, SessionDelta};
use crate::toolgen::{format_term, Parser, Term};

pub const API_VERSION: &str = "lda/1";

/// Default start symbol of designs built from the seed KB.
pub const DEFAULT_START: &str = "Prog";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub details: Json,
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ApiError { code: code.to_string(), message: message.into(), details: Json::Null }
    }

    /// Maps a domain error whose serialized form is tagged with `error`:
    /// the tag becomes the code and the remaining fields the details.
    pub fn domain<E: Serialize + Display>(e: &E) -> Self {
        let mut details = serde_json::to_value(e).unwrap_or(Json::Null);
        let code = match details.as_object_mut().and_then(|o| o.remove("error")) {
            Some(Json::String(s)) => s,
            _ => "domain-error".to_string(),
        };
        ApiError { code, message: e.to_string(), details }
    }
}

impl Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

/// Every response body. Exactly one of `data` and `error` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub ok: bool,
    #[serde(default = "none", skip_serializing_if = "Option::is_none")]
    pub data: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
    #[serde(rename = "api-version")]
    pub api_version: String,
}

fn none<T>() -> Option<T> {
    None
}

impl<T> Envelope<T> {
    pub fn success(data: T) -> Self {
        Envelope { ok: true, data: Some(data), error: None, api_version: API_VERSION.to_string() }
    }

    pub fn failure(error: ApiError) -> Self {
        Envelope { ok: false, data: None, error: Some(error), api_version: API_VERSION.to_string() }
    }

    pub fn into_result(self) -> Result<T, ApiError> {
        match (self.ok, self.data, self.error) {
            (true, Some(d), _) => Ok(d),
            (_, _, Some(e)) => Err(e),
            _ => Err(ApiError::new("bad-envelope", "envelope has neither data nor error")),
        }
    }
}

impl<T: DeserializeOwned> Envelope<T> {
    pub fn from_json(text: &str) -> Result<Self, ApiError> {
        serde_json::from_str(text).map_err(|e| ApiError::new("bad-envelope", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConceptSummary {
    pub id: ConceptId,
    pub kind: ConceptKind,
    pub description: String,
    pub parameters: Vec<String>,
}

pub fn concepts(kb: &KnowledgeBase) -> Vec<ConceptSummary> {
    kb.concepts
        .iter()
        .map(|(id, c)| ConceptSummary {
            id: id.clone(),
            kind: c.kind,
            description: c.description.clone(),
            parameters: c.parameters.iter().map(|p| p.name.clone()).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SessionView {
    pub session_id: String,
    #[serde(flatten)]
    pub session: DesignSession,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DecisionOutcome {
    pub session_id: String,
    #[serde(flatten)]
    pub session: DesignSession,
    pub delta: SessionDelta,
}

/// Diagnostics of a session, or of a decision log checked offline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CheckReport {
    pub state_hash: String,
    #[serde(flatten)]
    pub diagnostics: DiagnosticsReport,
}

impl CheckReport {
    pub fn new(session: &DesignSession, diagnostics: DiagnosticsReport) -> Self {
        CheckReport { state_hash: session.state_hash.clone(), diagnostics }
    }

    /// Violations, pending consequences or warning advice.
    pub fn needs_attention(&self) -> bool {
        !self.diagnostics.is_clean() || self.diagnostics.has_warnings()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FinalizeRequest {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_start")]
    pub start: String,
}

impl Default for FinalizeRequest {
    fn default() -> Self {
        FinalizeRequest { name: default_name(), start: default_start() }
    }
}

fn default_name() -> String {
    "lang".to_string()
}

fn default_start() -> String {
    DEFAULT_START.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FinalizeResult {
    pub design: LanguageDesign,
    pub description: LanguageDescription,
}

/// Finalizes a session and compiles the design.
pub fn finalize_session(kb: &KnowledgeBase, session: &DesignSession, req: &FinalizeRequest) -> Result<FinalizeResult, ApiError> {
    let design = finalize(kb, session, &req.name, &req.start).map_err(|e| ApiError::domain(&e))?;
    let description = compile_design(&design).map_err(|e| ApiError::domain(&e))?;
    Ok(FinalizeResult { design, description })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PreviewRequest {
    pub text: String,
    #[serde(flatten)]
    pub finalize: FinalizeRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PreviewResult {
    pub formatted: String,
    /// Absent for an empty sample.
    pub term: Option<Term>,
    /// The language's productions, one per line in canonical text.
    pub grammar: Vec<String>,
}

/// Formats a sample program with the session's language and checks that
/// the result parses back to the same term.
pub fn preview(kb: &KnowledgeBase, session: &DesignSession, req: &PreviewRequest) -> Result<PreviewResult, ApiError> {
    let FinalizeResult { description, .. } = finalize_session(kb, session, &req.finalize)?;
    preview_with(&description, &req.text)
}

pub fn preview_with(desc: &LanguageDescription, text: &str) -> Result<PreviewResult, ApiError> {
    let grammar = desc.grammar.productions.iter().map(ToString::to_string).collect();
    if text.trim().is_empty() {
        return Ok(PreviewResult { formatted: String::new(), term: None, grammar });
    }
    let parser = Parser::new(&desc.grammar);
    let term = parser.parse(text).map_err(|e| ApiError::domain(&e))?.without_spans();
    let formatted = format_term(desc, &term).map_err(|e| ApiError::domain(&e))?;
    let again = parser.parse(&formatted).map_err(|e| ApiError::domain(&e))?;
    if again.without_spans() != term {
        return Err(ApiError::new("round-trip-failure", "formatted text does not parse back to the same term"));
    }
    Ok(PreviewResult { formatted, term: Some(term), grammar })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Health {
    pub status: String,
    pub kb_ref: String,
    pub sessions: usize,
}
