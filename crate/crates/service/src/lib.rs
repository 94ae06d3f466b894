//! HTTP service for interactive keyword calibration.
//!
//! Routes (all bodies are JSON):
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/health` | liveness and corpus size |
//! | GET | `/api/documents` | `[{id, name}]` |
//! | GET | `/api/documents/{id}` | `{id, name, text}` |
//! | GET | `/api/keywords` | current keyword set |
//! | PUT | `/api/keywords` | replace the keyword set, append to history |
//! | GET | `/api/history` | keyword history, oldest first |
//! | POST | `/api/highlight` | same body as `slrkit highlight --format json` |
//! | GET | `/api/stats` | per-document rates and the target band check |
//!
//! Anything else falls through to the static UI directory when one is
//! configured.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use slrkit_core::calibration::{CalibrationSummary, DocumentRate};
use slrkit_core::corpus::Document;
use slrkit_core::embeddings::VectorStore;
use slrkit_core::highlighter::{render, Format, Highlighter, KeywordSet};
use slrkit_core::lexicon::LexiconGraph;
use slrkit_core::similarity::SimilarityConfig;
use slrkit_core::tagging::BuiltinTagger;
use thiserror::Error;
use tower_http::services::ServeDir;

pub const DEFAULT_MAX_TEXT_BYTES: usize = 1 << 20;
const MEMO_CAPACITY: usize = 512;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot read history file {path}")]
    HistoryIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("history file {path}:{line}: {reason}")]
    HistoryParse { path: PathBuf, line: usize, reason: String },
    #[error("cannot listen on {addr}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

/// Read-only inputs shared by every request.
pub struct Resources {
    pub lexicon: Arc<LexiconGraph>,
    pub store: VectorStore,
    pub config: SimilarityConfig,
    pub documents: BTreeMap<String, Document>,
}

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    /// Append-only JSON-lines keyword history. The last entry, if any,
    /// becomes the current keyword set on startup.
    pub history_path: Option<PathBuf>,
    /// Static UI bundle served at `/`.
    pub ui_dir: Option<PathBuf>,
    /// Largest accepted `text` in a highlight request; 0 means the default.
    pub max_text_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub timestamp_ms: u64,
    pub keywords: KeywordSet,
    /// Corpus mean highlighting rate under `keywords`.
    pub mean_rate: Option<f64>,
}

struct Session {
    keywords: KeywordSet,
    history: Vec<HistoryEntry>,
}

struct Rendered {
    json: String,
    rate: f64,
}

pub struct AppState {
    resources: Arc<Resources>,
    session: RwLock<Session>,
    memo: Mutex<HashMap<(String, u64), Arc<Rendered>>>,
    history_path: Option<PathBuf>,
    ui_dir: Option<PathBuf>,
    max_text_bytes: usize,
}

fn keyword_hash(keywords: &KeywordSet) -> u64 {
    let mut h = DefaultHasher::new();
    keywords.hash(&mut h);
    h.finish()
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn read_history(path: &Path) -> Result<Vec<HistoryEntry>, ServiceError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(ServiceError::HistoryIo {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ServiceError::HistoryParse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

impl AppState {
    pub fn new(resources: Resources, keywords: KeywordSet, options: ServiceOptions) -> Result<Self, ServiceError> {
        let history = match &options.history_path {
            Some(p) => read_history(p)?,
            None => Vec::new(),
        };
        let keywords = history.last().map_or(keywords, |e| e.keywords.clone());
        Ok(Self {
            resources: Arc::new(resources),
            session: RwLock::new(Session { keywords, history }),
            memo: Mutex::new(HashMap::new()),
            history_path: options.history_path,
            ui_dir: options.ui_dir,
            max_text_bytes: if options.max_text_bytes == 0 {
                DEFAULT_MAX_TEXT_BYTES
            } else {
                options.max_text_bytes
            },
        })
    }

    pub fn keywords(&self) -> KeywordSet {
        self.session.read().expect("session lock").keywords.clone()
    }

    pub fn history(&self) -> Vec<HistoryEntry> {
        self.session.read().expect("session lock").history.clone()
    }

    fn highlighter<'a>(&'a self, keywords: &KeywordSet) -> Highlighter<'a> {
        let res = &self.resources;
        Highlighter::new(keywords, &res.lexicon, &res.store, &res.config)
    }

    fn render_text(&self, text: &str, highlighter: &Highlighter) -> Result<Rendered, ApiError> {
        let tagger = BuiltinTagger::new(&self.resources.lexicon);
        let doc = highlighter
            .highlight_text(text, &tagger)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
        Ok(Rendered {
            json: render(&doc, Format::Json),
            rate: doc.rate,
        })
    }

    /// Highlight of a corpus document, memoized per keyword set.
    fn render_document<'a>(
        &'a self,
        id: &str,
        keywords: &KeywordSet,
        highlighter: &mut Option<Highlighter<'a>>,
    ) -> Result<Arc<Rendered>, ApiError> {
        let key = (id.to_string(), keyword_hash(keywords));
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }
        let doc = self
            .resources
            .documents
            .get(id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown document `{id}`")))?;
        let h = highlighter.get_or_insert_with(|| self.highlighter(keywords));
        let rendered = Arc::new(self.render_text(&doc.text, h)?);
        let mut memo = self.memo.lock().expect("memo lock");
        if memo.len() >= MEMO_CAPACITY {
            memo.clear();
        }
        memo.insert(key, rendered.clone());
        Ok(rendered)
    }

    /// Rates of every document under `keywords`, in id order.
    pub fn stats_for(&self, keywords: &KeywordSet) -> CalibrationSummary {
        let mut highlighter = None;
        let rates = self
            .resources
            .documents
            .keys()
            .map(|id| {
                let r = self
                    .render_document(id, keywords, &mut highlighter)
                    .expect("corpus documents exist and tag");
                DocumentRate {
                    id: id.clone(),
                    rate: r.rate,
                }
            })
            .collect();
        CalibrationSummary::new(rates)
    }

    /// Replaces the keyword set and records it. Writers are serialized.
    pub fn replace_keywords(&self, keywords: KeywordSet) -> Result<HistoryEntry, ApiError> {
        let mut session = self.session.write().expect("session lock");
        let entry = HistoryEntry {
            timestamp_ms: now_ms(),
            mean_rate: self.stats_for(&keywords).mean,
            keywords: keywords.clone(),
        };
        if let Some(path) = &self.history_path {
            let line = serde_json::to_string(&entry).expect("history entry serializes");
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .and_then(|mut f| writeln!(f, "{line}"))
                .map_err(|e| {
                    ApiError::new(
                        StatusCode::INTERNAL_SERVER_ERROR,
                        format!("cannot append to {}: {e}", path.display()),
                    )
                })?;
        }
        session.keywords = keywords;
        session.history.push(entry.clone());
        Ok(entry)
    }
}

/// Error body: `{"error": "...", "path": "entities[1]"}`; `path` is present
/// for body validation errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub path: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            path: None,
        }
    }

    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            message: message.into(),
            path: Some(path.into()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(p) = self.path {
            body["path"] = json!(p);
        }
        (self.status, Json(body)).into_response()
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            ApiError::new(StatusCode::BAD_REQUEST, format!("malformed JSON: {inner}"))
        } else {
            ApiError::invalid(path, inner.to_string())
        }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeywordBody {
    #[serde(default)]
    entities: Vec<String>,
    #[serde(default)]
    relations: Vec<String>,
    #[serde(default)]
    properties: Vec<String>,
}

fn checked_keywords(body: KeywordBody) -> Result<KeywordSet, ApiError> {
    use slrkit_core::highlighter::KeywordError;
    let set = KeywordSet::new(body.entities, body.relations, body.properties);
    set.validate().map_err(|e| match &e {
        KeywordError::Empty => ApiError::invalid(".", e.to_string()),
        KeywordError::Blank { section, index } | KeywordError::Duplicate { section, index, .. } => {
            ApiError::invalid(format!("{section}[{index}]"), e.to_string())
        }
    })?;
    Ok(set)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HighlightRequest {
    doc_id: Option<String>,
    text: Option<String>,
    keywords: Option<KeywordBody>,
}

type Shared = Arc<AppState>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn health(State(state): State<Shared>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "documents": state.resources.documents.len(),
        "synsets": state.resources.lexicon.len(),
    }))
}

async fn list_documents(State(state): State<Shared>) -> Json<serde_json::Value> {
    let docs: Vec<_> = state
        .resources
        .documents
        .values()
        .map(|d| json!({ "id": d.id, "name": d.name }))
        .collect();
    Json(json!(docs))
}

async fn get_document(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Document>, ApiError> {
    state
        .resources
        .documents
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown document `{id}`")))
}

async fn get_keywords(State(state): State<Shared>) -> Json<KeywordSet> {
    Json(state.keywords())
}

async fn put_keywords(State(state): State<Shared>, body: Bytes) -> Result<Json<serde_json::Value>, ApiError> {
    let keywords = checked_keywords(parse_body(&body)?)?;
    let entry = blocking(move || {
        let entry = state.replace_keywords(keywords)?;
        Ok::<_, ApiError>(json!({
            "keywords": entry.keywords,
            "entry": entry,
            "history_len": state.session.read().expect("session lock").history.len(),
        }))
    })
    .await??;
    Ok(Json(entry))
}

async fn get_history(State(state): State<Shared>) -> Json<Vec<HistoryEntry>> {
    Json(state.history())
}

async fn post_highlight(State(state): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: HighlightRequest = parse_body(&body)?;
    let keywords = match req.keywords {
        Some(k) => checked_keywords(k).map_err(|mut e| {
            e.path = e.path.map(|p| format!("keywords.{p}"));
            e
        })?,
        None => state.keywords(),
    };
    let json = blocking(move || -> Result<String, ApiError> {
        match (req.doc_id, req.text) {
            (Some(id), None) => Ok(state.render_document(&id, &keywords, &mut None)?.json.clone()),
            (None, Some(text)) => {
                if text.len() > state.max_text_bytes {
                    return Err(ApiError::new(
                        StatusCode::PAYLOAD_TOO_LARGE,
                        format!("text of {} bytes exceeds the {} byte limit", text.len(), state.max_text_bytes),
                    ));
                }
                Ok(state.render_text(&text, &state.highlighter(&keywords))?.json)
            }
            _ => Err(ApiError::invalid(".", "give exactly one of `doc_id` and `text`")),
        }
    })
    .await??;
    Ok(([(header::CONTENT_TYPE, "application/json")], json).into_response())
}

async fn get_stats(State(state): State<Shared>) -> Result<Json<CalibrationSummary>, ApiError> {
    let summary = blocking(move || state.stats_for(&state.keywords())).await?;
    Ok(Json(summary))
}

pub fn router(state: Shared) -> Router {
    let limit = state.max_text_bytes * 2 + (64 << 10);
    let ui = state.ui_dir.clone().filter(|d| d.is_dir());
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/documents", get(list_documents))
        .route("/api/documents/{id}", get(get_document))
        .route("/api/keywords", get(get_keywords).put(put_keywords))
        .route("/api/history", get(get_history))
        .route("/api/highlight", post(post_highlight))
        .route("/api/stats", get(get_stats))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state);
    match ui {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(state: Shared, addr: SocketAddr) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind { addr, source })?;
    log::info!("listening on http://{}", listener.local_addr().unwrap_or(addr));
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServiceError::Serve)
}
