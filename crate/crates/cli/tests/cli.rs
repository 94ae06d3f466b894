use std::fs;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use slrkit_core::corpus::{load_keywords, load_report};
use slrkit_core::embeddings::VectorStore;
use slrkit_core::highlighter::{parse_json, Highlighter, Role};
use slrkit_core::lexicon::LexiconGraph;
use slrkit_core::tagging::BuiltinTagger;
use tempfile::TempDir;

fn wordnet_dir() -> PathBuf {
    std::env::var_os("SLRKIT_WORDNET")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wordnet"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn lexicon() -> &'static LexiconGraph {
    static LEX: OnceLock<LexiconGraph> = OnceLock::new();
    LEX.get_or_init(|| LexiconGraph::load(wordnet_dir()).expect("lexicon loads"))
}

fn cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slrkit"));
    c.env("SLRKIT_WORDNET", wordnet_dir()).env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    cmd().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn body(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stderr(out)));
    v["body"].clone()
}

fn keywords() -> PathBuf {
    fixture("keywords.txt")
}

fn doc(i: usize) -> PathBuf {
    fixture(&format!("docs/example{i}.txt"))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn docs_dir(texts: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (id, text) in texts {
        fs::write(dir.path().join(format!("{id}.txt")), text).unwrap();
    }
    dir
}

// highlight ------------------------------------------------------------------

#[test]
fn html_matches_golden_files() {
    for i in [2, 4] {
        let out = run(&["highlight", s(&doc(i)), "-k", s(&keywords()), "--format", "html"]);
        assert!(out.status.success(), "{}", stderr(&out));
        let golden = fs::read_to_string(fixture(&format!("golden/example{i}.html"))).unwrap();
        assert_eq!(stdout(&out), golden, "example {i}");
    }
}

#[test]
fn html_explanations_follow_the_text() {
    let out = run(&["highlight", s(&doc(2)), "-k", s(&keywords()), "--format", "html", "--explain"]);
    let html = stdout(&out);
    let golden = fs::read_to_string(fixture("golden/example2.html")).unwrap();
    let rest = html.strip_prefix(&golden).expect("text comes first");
    assert!(rest.contains("<ol class=\"hl-explanations\">"));
    assert_eq!(rest.matches("<li class=").count(), 3);
    assert!(rest.contains("<li class=\"hl-relation\"><b>influence</b>: SimilarTo(&#39;affect&#39;, 0.84, &#39;wup&#39;)</li>"));
}

#[test]
fn ansi_explanations_are_tab_separated() {
    let out = run(&["highlight", s(&doc(2)), "-k", s(&keywords()), "--explain"]);
    let text = stdout(&out);
    assert!(text.contains("\x1b[34minfluence\x1b[0m"), "{text:?}");
    assert!(text.contains("1\tRelation\tinfluence\tSimilarTo('affect', 0.84, 'wup')\n"));
}

#[test]
fn json_output_round_trips() {
    let out = run(&["highlight", s(&doc(4)), "-k", s(&keywords()), "--format", "json"]);
    assert!(out.status.success());
    let spans = parse_json(&stdout(&out)).unwrap();

    let lex = lexicon();
    let kf = load_keywords(keywords(), Some(lex)).unwrap();
    let store = VectorStore::empty();
    let text = fs::read_to_string(doc(4)).unwrap();
    let expected = Highlighter::new(&kf.keywords, lex, &store, &kf.config).highlight(BuiltinTagger::new(lex).tag_text(&text));
    assert_eq!(spans, expected.spans);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let direct = run(&["highlight", s(&doc(1)), "-k", s(&keywords()), "--format", "json"]);
    let to_file = run(&["highlight", s(&doc(1)), "-k", s(&keywords()), "--format", "json", "--out", s(&path)]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn pretagged_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.txt");
    fs::write(&path, "Food\tfood\tNOUN\nmatters\tmatter\tVERB\n.\t\tPUNCT\n").unwrap();
    let out = run(&["--tagger", "pretagged", "highlight", s(&path), "-k", s(&keywords()), "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["source"], "Food matters .");
    assert_eq!(v["rate"], 0.5);
    assert_eq!(v["spans"][0]["text"], "Food");
    assert_eq!(parse_json(&stdout(&out)).unwrap()[0].role, Role::Entity);

    fs::write(&path, "Food NOUN\n").unwrap();
    let bad = run(&["--tagger", "pretagged", "highlight", s(&path), "-k", s(&keywords())]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("line 1"), "{}", stderr(&bad));
}

#[test]
fn missing_inputs_exit_with_two() {
    let out = run(&["highlight", s(&doc(1)), "-k", "/nonexistent/keywords.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: "), "{}", stderr(&out));
    assert!(stderr(&out).contains("/nonexistent/keywords.txt"));

    let out = cmd()
        .env_remove("SLRKIT_WORDNET")
        .args(["highlight", s(&doc(1)), "-k", s(&keywords())])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("SLRKIT_WORDNET"));

    let out = run(&["highlight", "/nonexistent/doc.txt", "-k", s(&keywords())]);
    assert_eq!(out.status.code(), Some(2));
}

// calibrate ------------------------------------------------------------------

#[test]
fn calibrate_text_report() {
    let out = run(&["calibrate", s(&fixture("docs")), "-k", s(&keywords())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6, "{text}");
    for (i, line) in lines[..4].iter().enumerate() {
        assert!(line.starts_with(&format!("example{}\t0.", i + 1)), "{line}");
    }
    assert!(lines[4].starts_with("mean 0.4"), "{}", lines[4]);
    assert!(lines[4].ends_with("over 4 documents (target 0.40 ± 0.10)"), "{}", lines[4]);
    assert_eq!(lines[5], "ok: within the target band");
}

#[test]
fn calibrate_flags_high_rates() {
    let dir = docs_dir(&[("a", "Food and health."), ("b", "Disease.")]);
    let out = run(&["calibrate", s(dir.path()), "-k", s(&keywords())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("OUT OF BAND: too many irrelevant words"), "{}", stdout(&out));
}

#[test]
fn calibrate_without_matches_suggests_broader_keywords() {
    let dir = docs_dir(&[("a", "Xyzzy plugh."), ("b", "Quux frobnicates.")]);
    let kw = tempfile::NamedTempFile::new().unwrap();
    fs::write(kw.path(), "[entities]\nvolcano\n").unwrap();
    let out = run(&["calibrate", s(dir.path()), "-k", s(kw.path()), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let b = body(&out);
    assert_eq!(b["mean"], 0.0);
    assert_eq!(b["hint"], "too_low");
}

#[test]
fn calibrate_empty_corpus_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["calibrate", s(dir.path()), "-k", s(&keywords())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no .txt or .md documents"));
}

#[test]
fn worker_count_does_not_change_reports() {
    let (docs, kw) = (fixture("docs"), keywords());
    let base = ["calibrate", s(&docs), "-k", s(&kw), "--format", "json"];
    let one = run(&[&["--jobs", "1"], &base[..]].concat());
    let four = run(&[&["--jobs", "4"], &base[..]].concat());
    assert_eq!(one.stdout, four.stdout);
    let ids: Vec<String> = body(&one)["documents"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["example1", "example2", "example3", "example4"]);
}

#[test]
fn json_report_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["calibrate", s(&fixture("docs")), "-k", s(&keywords()), "--format", "json", "--out", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let report = load_report(&path).unwrap();
    assert_eq!(report.command, "calibrate");
    assert_eq!(report.meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report.body["documents"].as_array().unwrap().len(), 4);
}

// verify ---------------------------------------------------------------------

const PAPER: &str = "Changing lifestyles, mainly due to work commit-\nment, have fuelled the increase in numbers eating out.";

fn record(paper: &str, q: &str, quotes: &[&str]) -> Value {
    json!({"paper_id": paper, "question_id": q, "question": "Why?", "quotes": quotes, "model_answer": "lifestyle"})
}

fn verify(evidence: &Value, extra: &[&str]) -> Output {
    let docs = docs_dir(&[("p1", PAPER)]);
    let dir = tempfile::tempdir().unwrap();
    let ev = write_json(dir.path(), "ev.json", evidence);
    let mut args = vec!["verify", s(&ev), "--docs", s(docs.path()), "--format", "json"];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn verbatim_quotes_pass() {
    let ev = json!([record("p1", "q1", &["work commitment, have fuelled the increase", "Changing lifestyles"])]);
    let out = verify(&ev, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let b = body(&out);
    assert_eq!(b["flagged"], json!([]));
    assert_eq!(b["records"][0]["mean"], 100.0);
    assert_eq!(b["records"][0]["quotes"][0]["verdict"], "pass");
}

#[test]
fn fabricated_quotes_are_flagged() {
    let ev = json!([
        record("p1", "q1", &["the increase in numbers eating out"]),
        record("p1", "q2", &["Regulators banned all fast food outlets in 2019."]),
    ]);
    let out = verify(&ev, &[]);
    assert_eq!(out.status.code(), Some(1));
    let b = body(&out);
    assert_eq!(b["flagged"], json!(["p1:q2"]));
    assert!(b["records"][1]["quotes"][0]["score"].as_u64().unwrap() < 60);
}

#[test]
fn threshold_above_100_flags_everything() {
    let ev = json!([record("p1", "q1", &["Changing lifestyles"]), record("p1", "q2", &["eating out"])]);
    let out = verify(&ev, &["--threshold", "101"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(body(&out)["flagged"], json!(["p1:q1", "p1:q2"]));
}

#[test]
fn case_folding_is_opt_in() {
    let ev = json!([record("p1", "q1", &["CHANGING LIFESTYLES, MAINLY DUE TO WORK"])]);
    assert_eq!(verify(&ev, &[]).status.code(), Some(1));
    let folded = verify(&ev, &["--case-fold"]);
    assert_eq!(folded.status.code(), Some(0));
    assert_eq!(body(&folded)["records"][0]["mean"], 100.0);
}

#[test]
fn direct_answers_are_skipped_and_text_summarizes() {
    let ev = json!([
        record("p1", "q1", &["fuelled the increase"]),
        {"paper_id": "p1", "question_id": "q2", "question": "?", "model_answer": "no", "direct": true},
    ]);
    let docs = docs_dir(&[("p1", PAPER)]);
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(dir.path(), "ev.json", &ev);
    let out = run(&["verify", s(&path), "--docs", s(docs.path())]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("p1:q1\tmean 100.0\tok\n"), "{text}");
    assert!(text.ends_with("1 records checked, 0 flagged, 1 without quotes skipped\n"), "{text}");
}

#[test]
fn missing_source_document_is_an_error() {
    let ev = json!([record("p9", "q1", &["anything"])]);
    let out = verify(&ev, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no document for paper `p9`"), "{}", stderr(&out));
}

// compare --------------------------------------------------------------------

fn answer(q: &str, model: &str, expert: Option<&str>, score: Option<f64>) -> Value {
    let mut v = json!({"paper_id": "p1", "question_id": q, "question": "?", "model_answer": model, "direct": true});
    if let Some(e) = expert {
        v["expert_answer"] = json!(e);
    }
    if let Some(x) = score {
        v["expert_score"] = json!(x);
    }
    v
}

#[test]
fn compare_word_and_sentence_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let ev = write_json(
        dir.path(),
        "ev.json",
        &json!([
            answer("q1", "food improves health", Some("food improves health"), Some(1.0)),
            answer("q2", "food", Some("health"), Some(0.0)),
            answer("q3", "food", None, None),
        ]),
    );
    let vectors = dir.path().join("vec.txt");
    fs::write(&vectors, "food 1 0\nhealth 0 1\nimproves 1 1\n").unwrap();
    let sentences = dir.path().join("sent.txt");
    fs::write(&sentences, "p1:q1:model 1 0\np1:q1:expert 1 0\np1:q2:model 1 0\np1:q2:expert 1 1\n").unwrap();
    let out = run(&[
        "--vectors",
        s(&vectors),
        "compare",
        s(&ev),
        "--sentence-embeddings",
        s(&sentences),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let b = body(&out);
    let rows = b["records"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(b["skipped_without_expert"], 1);
    let close = |v: &Value, want: f64| (v.as_f64().unwrap() - want).abs() < 1e-12;
    assert!(close(&rows[0]["mean_vector"], 1.0));
    assert!(close(&rows[0]["sentence"], 1.0));
    assert!(close(&rows[0]["rescaled"], 1.0));
    assert!(close(&rows[1]["mean_vector"], 0.0));
    assert!(close(&rows[1]["sentence"], 0.5f64.sqrt()));
    assert!(close(&rows[1]["rescaled"], (0.5f64.sqrt() - 0.7) / 0.3));
    // two pairs are too few for an interval
    assert!(b["correlation"]["sentence"]["error"].as_str().unwrap().contains("at least 4"));
}

#[test]
fn compare_needs_some_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let ev = write_json(dir.path(), "ev.json", &json!([answer("q1", "a", Some("b"), None)]));
    let out = run(&["compare", s(&ev)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nothing to compare"));
}

// screen-stats ---------------------------------------------------------------

fn labelled(n: usize, model: Option<&str>, expert: Option<&str>, offset: usize) -> Vec<Value> {
    (0..n)
        .map(|i| {
            let mut v = json!({"paper_id": format!("p{}", offset + i), "question_id": "rel", "question": "?", "model_answer": "", "direct": true});
            if let Some(m) = model {
                v["model_label"] = json!(m);
            }
            if let Some(e) = expert {
                v["expert_label"] = json!(e);
            }
            v
        })
        .collect()
}

#[test]
fn screen_stats_counts_and_exclusions() {
    let dir = tempfile::tempdir().unwrap();
    let mut records = labelled(3, Some("relevant"), Some("relevant"), 0);
    records.extend(labelled(2, Some("irrelevant"), Some("irrelevant"), 10));
    records.extend(labelled(1, Some("relevant"), None, 20));
    records.extend(labelled(1, None, None, 30));
    let ev = write_json(dir.path(), "ev.json", &Value::Array(records));
    let out = run(&["screen-stats", s(&ev), "--format", "json"]);
    let b = body(&out);
    assert_eq!(b["confusion"], json!({"tp": 3, "fp": 0, "tn": 2, "fn": 0}));
    assert_eq!(b["false_positive_rate"], 0.0);
    assert_eq!(b["false_negative_rate"], 0.0);
    assert_eq!(b["excluded"], 2);
}

#[test]
fn screen_stats_undefined_rates() {
    let dir = tempfile::tempdir().unwrap();
    let ev = write_json(dir.path(), "ev.json", &Value::Array(labelled(4, Some("irrelevant"), Some("irrelevant"), 0)));
    let out = run(&["screen-stats", s(&ev)]);
    let text = stdout(&out);
    assert!(text.contains("false positive rate 0.00"), "{text}");
    assert!(text.contains("false negative rate undefined"), "{text}");
}

// serve ----------------------------------------------------------------------

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    Some(response)
}

#[test]
fn serve_answers_over_http() {
    let port = free_port();
    let history = tempfile::tempdir().unwrap();
    let mut child = cmd()
        .args(["serve", "--docs", s(&fixture("docs")), "-k", s(&keywords()), "--port", &port.to_string()])
        .args(["--history", s(&history.path().join("h.jsonl"))])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(30);
    let response = loop {
        if let Some(r) = get(port, "/api/health") {
            break r;
        }
        assert!(Instant::now() < deadline, "service did not come up");
        std::thread::sleep(Duration::from_millis(100));
    };
    let documents = get(port, "/api/documents").unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(documents.contains("\"example3\""), "{documents}");
}

#[test]
fn serve_reports_a_busy_port() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port().to_string();
    let out = run(&["serve", "--docs", s(&fixture("docs")), "-k", s(&keywords()), "--port", &port]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot listen on"), "{}", stderr(&out));
}

#[test]
fn serve_requires_documents_and_keywords() {
    let out = run(&["serve", "--docs", s(&fixture("docs"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--keywords"));
}
