use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use slrkit_core::corpus::Document;
use slrkit_core::embeddings::VectorStore;
use slrkit_core::highlighter::{render, Format, Highlighter, KeywordSet};
use slrkit_core::lexicon::LexiconGraph;
use slrkit_core::similarity::SimilarityConfig;
use slrkit_core::tagging::BuiltinTagger;
use slrkit_service::{router, AppState, Resources, ServiceOptions};
use tower::ServiceExt;

fn lexicon() -> Arc<LexiconGraph> {
    static LEX: OnceLock<Arc<LexiconGraph>> = OnceLock::new();
    LEX.get_or_init(|| {
        let dir = std::env::var_os("SLRKIT_WORDNET")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wordnet"));
        Arc::new(LexiconGraph::load(dir).expect("lexicon loads"))
    })
    .clone()
}

fn keywords() -> KeywordSet {
    KeywordSet::new(
        ["health", "disease", "outcome", "food", "lifestyle"],
        ["affect", "improve", "stimulate", "contribute"],
        ["environmental"],
    )
}

const DOCS: [(&str, &str); 2] = [
    ("a", "Foodborne illnesses significantly influence individuals' nutritional status."),
    ("b", "Significant changes have occurred in food systems."),
];

fn documents() -> BTreeMap<String, Document> {
    DOCS.iter()
        .map(|(id, text)| {
            (
                id.to_string(),
                Document {
                    id: id.to_string(),
                    name: format!("{id}.txt"),
                    text: text.to_string(),
                },
            )
        })
        .collect()
}

fn state_with(options: ServiceOptions, docs: BTreeMap<String, Document>) -> Arc<AppState> {
    let resources = Resources {
        lexicon: lexicon(),
        store: VectorStore::empty(),
        config: SimilarityConfig::default(),
        documents: docs,
    };
    Arc::new(AppState::new(resources, keywords(), options).unwrap())
}

fn state() -> Arc<AppState> {
    state_with(ServiceOptions::default(), documents())
}

async fn call(state: &Arc<AppState>, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = router(state.clone()).oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn parse(body: &str) -> Value {
    serde_json::from_str(body).unwrap()
}

#[tokio::test]
async fn health_and_documents() {
    let s = state();
    let (status, body) = call(&s, Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(parse(&body)["documents"], 2);

    let (_, body) = call(&s, Method::GET, "/api/documents", None).await;
    assert_eq!(parse(&body), json!([{"id": "a", "name": "a.txt"}, {"id": "b", "name": "b.txt"}]));
    let (status, body) = call(&s, Method::GET, "/api/documents/b", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(parse(&body)["text"], DOCS[1].1);
    let (status, body) = call(&s, Method::GET, "/api/documents/zzz", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(parse(&body)["error"].as_str().unwrap().contains("zzz"));
}

#[tokio::test]
async fn highlight_matches_core_rendering() {
    let s = state();
    let lex = lexicon();
    let store = VectorStore::empty();
    let cfg = SimilarityConfig::default();
    let h = Highlighter::new(&keywords(), &lex, &store, &cfg);
    for (id, text) in DOCS {
        let expected = render(&h.highlight_text(text, &BuiltinTagger::new(&lex)).unwrap(), Format::Json);
        let (status, by_id) = call(&s, Method::POST, "/api/highlight", Some(json!({"doc_id": id}))).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(by_id, expected);
        let (_, by_text) = call(&s, Method::POST, "/api/highlight", Some(json!({"text": text}))).await;
        assert_eq!(by_text, expected);
        // memoized second call
        let (_, again) = call(&s, Method::POST, "/api/highlight", Some(json!({"doc_id": id}))).await;
        assert_eq!(again, expected);
    }
}

#[tokio::test]
async fn highlight_request_errors() {
    let s = state();
    let (status, _) = call(&s, Method::POST, "/api/highlight", Some(json!({"doc_id": "nope"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&s, Method::POST, "/api/highlight", Some(json!({}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&s, Method::POST, "/api/highlight", Some(json!({"doc_id": "a", "text": "x"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, body) = call(&s, Method::POST, "/api/highlight", Some(json!({"text": "x", "keywords": {"entities": ["a", "a"]}}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(parse(&body)["path"], "keywords.entities[1]");

    let small = state_with(ServiceOptions { max_text_bytes: 16, ..Default::default() }, documents());
    let (status, _) = call(&small, Method::POST, "/api/highlight", Some(json!({"text": "x".repeat(17)}))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    let (status, _) = call(&small, Method::POST, "/api/highlight", Some(json!({"text": "x".repeat(16)}))).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn keyword_override_and_empty_keywords() {
    let s = state();
    let (_, body) = call(&s, Method::POST, "/api/highlight", Some(json!({"doc_id": "a", "keywords": {"properties": ["blue"]}}))).await;
    let report = parse(&body);
    assert_eq!(report["spans"], json!([]));
    assert_eq!(report["rate"], 0.0);
    // the override does not change the session
    let (_, current) = call(&s, Method::GET, "/api/keywords", None).await;
    assert_eq!(parse(&current), serde_json::to_value(keywords()).unwrap());
}

#[tokio::test]
async fn put_keywords_updates_session_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("history.jsonl");
    let opts = ServiceOptions { history_path: Some(history.clone()), ..Default::default() };
    let s = state_with(opts.clone(), documents());

    let first = json!({"entities": ["food"], "relations": [], "properties": []});
    let (status, body) = call(&s, Method::PUT, "/api/keywords", Some(first.clone())).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(parse(&body)["history_len"], 1);
    let (_, got) = call(&s, Method::GET, "/api/keywords", None).await;
    assert_eq!(parse(&got), first);

    let second = json!({"entities": ["disease"], "relations": ["affect"], "properties": []});
    let (_, body) = call(&s, Method::PUT, "/api/keywords", Some(second.clone())).await;
    assert_eq!(parse(&body)["history_len"], 2);
    let (_, hist) = call(&s, Method::GET, "/api/history", None).await;
    let hist = parse(&hist);
    assert_eq!(hist.as_array().unwrap().len(), 2);
    assert_eq!(hist[0]["keywords"], first);
    assert_eq!(std::fs::read_to_string(&history).unwrap().lines().count(), 2);

    // highlight follows the new set
    let (_, body) = call(&s, Method::POST, "/api/highlight", Some(json!({"text": "Food is good."}))).await;
    assert_eq!(parse(&body)["spans"], json!([]));

    // a restart resumes from the history file
    let restarted = state_with(opts, documents());
    let (_, got) = call(&restarted, Method::GET, "/api/keywords", None).await;
    assert_eq!(parse(&got), second);
    assert_eq!(restarted.history().len(), 2);
}

#[tokio::test]
async fn put_keywords_validation() {
    let s = state();
    let cases = [
        (json!({"entities": [], "relations": [], "properties": []}), "."),
        (json!({"entities": ["food", " "]}), "entities[1]"),
        (json!({"relations": ["affect", "affect"]}), "relations[1]"),
        (json!({"entities": ["food", 3]}), "entities[1]"),
        (json!({"entitys": ["food"]}), "entitys"),
    ];
    for (body, path) in cases {
        let (status, resp) = call(&s, Method::PUT, "/api/keywords", Some(body.clone())).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(parse(&resp)["path"], path, "{body}: {resp}");
    }
    let req = Request::builder()
        .method(Method::PUT)
        .uri("/api/keywords")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = router(s.clone()).oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    assert!(s.history().is_empty());
}

#[tokio::test]
async fn stats_follow_keywords() {
    let s = state();
    let (status, body) = call(&s, Method::GET, "/api/stats", None).await;
    assert_eq!(status, StatusCode::OK);
    let stats = parse(&body);
    assert_eq!(stats["documents"].as_array().unwrap().len(), 2);
    assert_eq!(stats["target"], 0.4);
    let summary = s.stats_for(&keywords());
    assert_eq!(stats, serde_json::to_value(&summary).unwrap());
    for (i, (id, _)) in DOCS.iter().enumerate() {
        let (_, h) = call(&s, Method::POST, "/api/highlight", Some(json!({"doc_id": id}))).await;
        assert_eq!(stats["documents"][i]["rate"], parse(&h)["rate"]);
    }
    let rates: Vec<f64> = summary.documents.iter().map(|d| d.rate).collect();
    assert_eq!(summary.mean.unwrap(), (rates[0] + rates[1]) / 2.0);

    let empty = state_with(ServiceOptions::default(), BTreeMap::new());
    let (_, body) = call(&empty, Method::GET, "/api/stats", None).await;
    let stats = parse(&body);
    assert_eq!(stats["documents"], json!([]));
    assert_eq!(stats["mean"], Value::Null);
    assert_eq!(stats["in_band"], false);
    assert_eq!(stats["warnings"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn all_match_corpus_is_out_of_band() {
    let docs = BTreeMap::from([(
        "d".to_string(),
        Document { id: "d".into(), name: "d.txt".into(), text: "Food, food; food.".into() },
    )]);
    let s = state_with(ServiceOptions::default(), docs);
    let (_, body) = call(&s, Method::GET, "/api/stats", None).await;
    let stats = parse(&body);
    assert_eq!(stats["mean"], 1.0);
    assert_eq!(stats["in_band"], false);
    assert_eq!(stats["hint"], "too_high");
}

#[tokio::test]
async fn concurrent_puts_serialize() {
    let s = state();
    let mut tasks = Vec::new();
    for kw in ["food", "disease", "health", "outcome"] {
        let s = s.clone();
        tasks.push(tokio::spawn(async move {
            call(&s, Method::PUT, "/api/keywords", Some(json!({"entities": [kw]}))).await.0
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let history = s.history();
    assert_eq!(history.len(), 4);
    assert_eq!(history.last().unwrap().keywords, s.keywords());
}

#[tokio::test]
async fn static_ui_fallback() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>ui</h1>").unwrap();
    let s = state_with(ServiceOptions { ui_dir: Some(dir.path().to_path_buf()), ..Default::default() }, documents());
    let (status, body) = call(&s, Method::GET, "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "<h1>ui</h1>");
    let (status, body) = call(&s, Method::GET, "/", None).await;
    assert_eq!((status, body.as_str()), (StatusCode::OK, "<h1>ui</h1>"));
    let (status, _) = call(&state(), Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn bind_conflict_is_reported() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let err = slrkit_service::serve(state(), addr).await.unwrap_err();
    assert!(matches!(err, slrkit_service::ServiceError::Bind { .. }), "{err}");
}
