use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use slrkit_core::calibration::{CalibrationSummary, DocumentRate};
use slrkit_core::corpus::{
    embedding_id, load_documents, load_evidence, load_keywords, load_sentence_embeddings, EvidenceRecord, Label,
    ProjectConfig, RunReport,
};
use slrkit_core::embeddings::VectorStore;
use slrkit_core::highlighter::{escape_html, render, Format, HighlightedDocument, Highlighter};
use slrkit_core::lexicon::{LexiconGraph, Vocabulary};
use slrkit_core::metrics::{
    confusion_rates, correlation_estimate, mean_std, mean_vector_similarity, rescale, sentence_embedding_similarity,
    Confusion, DEFAULT_Z, RESCALE_HI, RESCALE_LO,
};
use slrkit_core::tagging::{BuiltinTagger, PretaggedTagger, Tagger};
use slrkit_core::verification::{normalize, verify_evidence, MatchOptions, Verdict};
use slrkit_service::{AppState, Resources, ServiceOptions};

use crate::{Cli, Command, HighlightFormat, Output, ReportFormat, TaggerKind};

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    /// Completed, but some content needs attention.
    Flagged,
}

impl Status {
    pub fn code(self) -> ExitCode {
        match self {
            Status::Ok => ExitCode::SUCCESS,
            Status::Flagged => ExitCode::from(1),
        }
    }
}

pub fn run(cli: Cli) -> Result<Status> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .context("cannot start worker threads")?;
    pool.install(|| match &cli.command {
        Command::Highlight {
            document,
            keywords,
            format,
            explain,
            out,
        } => highlight(&cli, document, keywords, *format, *explain, out.as_deref()),
        Command::Calibrate {
            corpus,
            keywords,
            output,
        } => calibrate(&cli, corpus, keywords, output),
        Command::Verify {
            evidence,
            docs,
            threshold,
            case_fold,
            output,
        } => verify(&cli, evidence, docs, *threshold, *case_fold, output),
        Command::Compare {
            evidence,
            sentence_embeddings,
            case_fold,
            output,
        } => compare(&cli, evidence, sentence_embeddings.as_deref(), *case_fold, output),
        Command::ScreenStats { evidence, output } => screen_stats(evidence, output),
        Command::Serve {
            config,
            docs,
            keywords,
            port,
            host,
            ui,
            history,
        } => serve(
            &cli,
            config.as_deref(),
            docs.as_deref(),
            keywords.as_deref(),
            SocketAddr::new(*host, *port),
            ui.clone(),
            history.clone(),
        ),
    })
}

fn load_lexicon(path: Option<&Path>) -> Result<LexiconGraph> {
    let dir = path.context("no lexicon given: pass --lexicon or set SLRKIT_WORDNET")?;
    LexiconGraph::load(dir).with_context(|| format!("cannot load lexicon from {}", dir.display()))
}

fn load_store(path: Option<&Path>) -> Result<VectorStore> {
    match path {
        Some(p) => VectorStore::load(p).with_context(|| format!("cannot load vectors from {}", p.display())),
        None => Ok(VectorStore::empty()),
    }
}

fn tagger<'a>(kind: TaggerKind, lexicon: &'a LexiconGraph) -> Box<dyn Tagger + Sync + 'a> {
    match kind {
        TaggerKind::Builtin => Box::new(BuiltinTagger::new(lexicon)),
        TaggerKind::Pretagged => Box::new(PretaggedTagger),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report(command: &str, body: &impl Serialize, text: String, output: &Output) -> Result<()> {
    let rendered = match output.format {
        ReportFormat::Text => text,
        ReportFormat::Json => {
            let mut report = RunReport::new(command, serde_json::to_value(body)?);
            report.meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
    };
    emit(&rendered, output.out.as_deref())
}

fn explanations(doc: &HighlightedDocument, format: HighlightFormat) -> String {
    let mut out = String::new();
    match format {
        HighlightFormat::Json => {}
        HighlightFormat::Ansi => {
            out.push_str("\n\n");
            for (i, s) in doc.spans.iter().enumerate() {
                out.push_str(&format!(
                    "{i}\t{}\t{}\t{}\n",
                    s.role.as_str(),
                    doc.doc.text_of(s.start, s.end),
                    s.explanation
                ));
            }
        }
        HighlightFormat::Html => {
            out.push_str("\n<ol class=\"hl-explanations\">\n");
            for s in &doc.spans {
                out.push_str(&format!(
                    "<li class=\"{}\"><b>{}</b>: {}</li>\n",
                    s.role.css_class(),
                    escape_html(&doc.doc.text_of(s.start, s.end)),
                    escape_html(&s.explanation.to_string())
                ));
            }
            out.push_str("</ol>\n");
        }
    }
    out
}

fn highlight(
    cli: &Cli,
    document: &Path,
    keywords: &Path,
    format: HighlightFormat,
    explain: bool,
    out: Option<&Path>,
) -> Result<Status> {
    let lexicon = load_lexicon(cli.lexicon.as_deref())?;
    let kf = load_keywords(keywords, Some(&lexicon))?;
    let store = load_store(cli.vectors.as_deref())?;
    let text = read_text(document)?;
    let highlighter = Highlighter::new(&kf.keywords, &lexicon, &store, &kf.config);
    let doc = highlighter
        .highlight_text(&text, tagger(cli.tagger, &lexicon).as_ref())
        .with_context(|| format!("cannot tag {}", document.display()))?;
    let mut rendered = render(
        &doc,
        match format {
            HighlightFormat::Ansi => Format::Ansi,
            HighlightFormat::Html => Format::Html,
            HighlightFormat::Json => Format::Json,
        },
    );
    if explain {
        rendered.push_str(&explanations(&doc, format));
    }
    emit(&rendered, out)?;
    Ok(Status::Ok)
}

fn calibrate(cli: &Cli, corpus: &Path, keywords: &Path, output: &Output) -> Result<Status> {
    let docs: Vec<_> = load_documents(corpus)?.into_values().collect();
    if docs.is_empty() {
        bail!("no .txt or .md documents in {}", corpus.display());
    }
    let lexicon = load_lexicon(cli.lexicon.as_deref())?;
    let kf = load_keywords(keywords, Some(&lexicon))?;
    let store = load_store(cli.vectors.as_deref())?;
    let highlighter = Highlighter::new(&kf.keywords, &lexicon, &store, &kf.config);
    let tagger = tagger(cli.tagger, &lexicon);
    let rates = docs
        .par_iter()
        .map(|d| {
            let doc = highlighter
                .highlight_text(&d.text, tagger.as_ref())
                .with_context(|| format!("cannot tag {}", d.name))?;
            Ok(DocumentRate {
                id: d.id.clone(),
                rate: doc.rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = CalibrationSummary::new(rates);

    let mut text = String::new();
    for d in &summary.documents {
        text.push_str(&format!("{}\t{:.4}\n", d.id, d.rate));
    }
    let mean = summary.mean.unwrap_or(0.0);
    text.push_str(&format!(
        "mean {mean:.4} ± {:.4} over {} documents (target {:.2} ± {:.2})\n",
        summary.std.unwrap_or(0.0),
        summary.documents.len(),
        summary.target,
        summary.tolerance
    ));
    if let Some(hint) = summary.hint {
        let tag = if summary.in_band { "ok" } else { "OUT OF BAND" };
        text.push_str(&format!("{tag}: {}\n", hint.message()));
    }
    emit_report("calibrate", &summary, text, output)?;
    Ok(if summary.in_band { Status::Ok } else { Status::Flagged })
}

#[derive(Serialize)]
struct QuoteRow {
    quote: String,
    normalized: String,
    score: u32,
    span: (usize, usize),
    verdict: Verdict,
}

#[derive(Serialize)]
struct RecordAudit {
    key: String,
    mean: f64,
    flagged: bool,
    quotes: Vec<QuoteRow>,
}

fn verify(cli: &Cli, evidence: &Path, docs_dir: &Path, threshold: u32, case_fold: bool, output: &Output) -> Result<Status> {
    let records = load_evidence(evidence)?;
    let docs = load_documents(docs_dir)?;
    let lexicon = match cli.lexicon.as_deref() {
        Some(p) => Some(load_lexicon(Some(p))?),
        None => None,
    };
    let options = MatchOptions { threshold, case_fold };

    let (direct, quoted): (Vec<&EvidenceRecord>, Vec<&EvidenceRecord>) =
        records.iter().partition(|r| r.quotes.is_empty());
    let mut needed: Vec<&str> = quoted.iter().map(|r| r.paper_id.as_str()).collect();
    needed.sort_unstable();
    needed.dedup();
    let normalized: BTreeMap<&str, String> = needed
        .par_iter()
        .map(|id| {
            let doc = docs
                .get(*id)
                .with_context(|| format!("no document for paper `{id}` in {}", docs_dir.display()))?;
            let vocabulary = lexicon.as_ref().map(|l| l as &dyn Vocabulary);
            Ok((*id, normalize(&doc.text, vocabulary)))
        })
        .collect::<Result<_>>()?;

    let audits = quoted
        .par_iter()
        .map(|r| {
            let audit = verify_evidence(r, &normalized[r.paper_id.as_str()], &options)
                .with_context(|| format!("record {}", r.key()))?;
            Ok(RecordAudit {
                key: r.key(),
                mean: audit.mean,
                flagged: audit.flagged,
                quotes: r
                    .quotes
                    .iter()
                    .zip(audit.results)
                    .map(|(q, m)| QuoteRow {
                        quote: q.clone(),
                        normalized: m.normalized_quote,
                        score: m.score,
                        span: m.matched_span,
                        verdict: m.verdict,
                    })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let flagged: Vec<&str> = audits.iter().filter(|a| a.flagged).map(|a| a.key.as_str()).collect();
    let skipped: Vec<String> = direct.iter().map(|r| r.key()).collect();
    let mut text = String::new();
    for a in &audits {
        text.push_str(&format!(
            "{}\tmean {:.1}\t{}\n",
            a.key,
            a.mean,
            if a.flagged { "FLAGGED" } else { "ok" }
        ));
        for q in &a.quotes {
            let verdict = if q.verdict == Verdict::Pass { "pass" } else { "low" };
            text.push_str(&format!("  {:>3} {verdict}\t{:?}\n", q.score, q.normalized));
        }
    }
    text.push_str(&format!(
        "{} records checked, {} flagged, {} without quotes skipped\n",
        audits.len(),
        flagged.len(),
        skipped.len()
    ));
    let body = json!({
        "threshold": threshold,
        "case_fold": case_fold,
        "records": audits,
        "flagged": flagged,
        "skipped_direct": skipped,
    });
    emit_report("verify", &body, text, output)?;
    Ok(if flagged.is_empty() { Status::Ok } else { Status::Flagged })
}

#[derive(Serialize)]
struct CompareRow {
    key: String,
    mean_vector: Option<f64>,
    sentence: Option<f64>,
    rescaled: Option<f64>,
    expert_score: Option<f64>,
}

fn correlation_json(rows: &[CompareRow], pick: impl Fn(&CompareRow) -> Option<f64>) -> Value {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| Some((r.expert_score?, pick(r)?))).unzip();
    match correlation_estimate(&xs, &ys, DEFAULT_Z) {
        Ok(e) => json!(e),
        Err(e) => json!({ "error": e.to_string(), "n": xs.len() }),
    }
}

fn summary_json(rows: &[CompareRow], pick: impl Fn(&CompareRow) -> Option<f64>) -> Value {
    let xs: Vec<f64> = rows.iter().filter_map(pick).collect();
    match mean_std(&xs) {
        Ok((mean, std)) => json!({ "mean": mean, "std": std, "n": xs.len() }),
        Err(_) => Value::Null,
    }
}

fn compare(cli: &Cli, evidence: &Path, sentence_path: Option<&Path>, case_fold: bool, output: &Output) -> Result<Status> {
    if cli.vectors.is_none() && sentence_path.is_none() {
        bail!("nothing to compare: pass --vectors and/or --sentence-embeddings");
    }
    let records = load_evidence(evidence)?;
    let sentences = sentence_path.map(load_sentence_embeddings).transpose()?;
    let store = load_store(cli.vectors.as_deref())?;
    let lexicon = match (cli.vectors.is_some(), cli.tagger) {
        (true, TaggerKind::Builtin) => Some(load_lexicon(cli.lexicon.as_deref())?),
        _ => None,
    };
    let tagger: Option<Box<dyn Tagger + Sync>> = match (&lexicon, cli.tagger, cli.vectors.is_some()) {
        (_, _, false) => None,
        (Some(lex), _, true) => Some(Box::new(BuiltinTagger::new(lex))),
        (None, _, true) => Some(Box::new(PretaggedTagger)),
    };

    let with_expert: Vec<(&EvidenceRecord, &str)> = records
        .iter()
        .filter_map(|r| Some((r, r.expert_answer.as_deref()?)))
        .collect();
    let skipped = records.len() - with_expert.len();
    let rows: Vec<CompareRow> = with_expert
        .par_iter()
        .map(|(r, expert)| {
            let mean_vector = tagger.as_ref().and_then(|t| {
                mean_vector_similarity(&r.model_answer, expert, &store, t.as_ref(), case_fold)
                    .map_err(|e| log::warn!("{}: word vectors: {e}", r.key()))
                    .ok()
            });
            let sentence = sentences.as_ref().and_then(|s| {
                let (m, x) = (embedding_id(r, false), embedding_id(r, true));
                match (s.get(&m), s.get(&x)) {
                    (Some(a), Some(b)) => sentence_embedding_similarity(a, b)
                        .map_err(|e| log::warn!("{}: sentence embeddings: {e}", r.key()))
                        .ok(),
                    _ => {
                        log::warn!("{}: no sentence embeddings `{m}` / `{x}`", r.key());
                        None
                    }
                }
            });
            CompareRow {
                key: r.key(),
                rescaled: sentence.map(|s| rescale(s, RESCALE_LO, RESCALE_HI).expect("valid range")),
                mean_vector,
                sentence,
                expert_score: r.expert_score,
            }
        })
        .collect();

    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    let mut text = String::from("record\tmean_vector\tsentence\trescaled\texpert\n");
    for r in &rows {
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.key,
            fmt(r.mean_vector),
            fmt(r.sentence),
            fmt(r.rescaled),
            fmt(r.expert_score)
        ));
    }
    let corr_mv = correlation_json(&rows, |r| r.mean_vector);
    let corr_s = correlation_json(&rows, |r| r.sentence);
    for (name, c) in [("mean_vector", &corr_mv), ("sentence", &corr_s)] {
        match c.get("r") {
            Some(r) => text.push_str(&format!(
                "{name} vs expert: r = {:.3} ± {:.3} (n = {})\n",
                r.as_f64().unwrap_or(f64::NAN),
                c["scaled_uncertainty"].as_f64().unwrap_or(f64::NAN),
                c["n"]
            )),
            None => text.push_str(&format!("{name} vs expert: {}\n", c["error"].as_str().unwrap_or("n/a"))),
        }
    }
    text.push_str(&format!("{skipped} records without an expert answer skipped\n"));
    let body = json!({
        "records": rows,
        "summary": {
            "mean_vector": summary_json(&rows, |r| r.mean_vector),
            "sentence": summary_json(&rows, |r| r.sentence),
            "rescaled": summary_json(&rows, |r| r.rescaled),
        },
        "correlation": { "mean_vector": corr_mv, "sentence": corr_s },
        "skipped_without_expert": skipped,
    });
    emit_report("compare", &body, text, output)?;
    Ok(Status::Ok)
}

fn screen_stats(evidence: &Path, output: &Output) -> Result<Status> {
    let records = load_evidence(evidence)?;
    let mut c = Confusion::default();
    let mut excluded = 0;
    for r in &records {
        match (r.model_label, r.expert_label) {
            (Some(Label::Relevant), Some(Label::Relevant)) => c.tp += 1,
            (Some(Label::Relevant), Some(Label::Irrelevant)) => c.fp += 1,
            (Some(Label::Irrelevant), Some(Label::Irrelevant)) => c.tn += 1,
            (Some(Label::Irrelevant), Some(Label::Relevant)) => c.fn_ += 1,
            _ => excluded += 1,
        }
    }
    let rates = confusion_rates(&c);
    let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.2}"));
    let text = format!(
        "tp {}  fp {}  tn {}  fn {}  ({excluded} records without both labels excluded)\n\
         false positive rate {}\nfalse negative rate {}\n",
        c.tp,
        c.fp,
        c.tn,
        c.fn_,
        fmt(rates.false_positive_rate),
        fmt(rates.false_negative_rate)
    );
    let body = json!({
        "confusion": c,
        "false_positive_rate": rates.false_positive_rate,
        "false_negative_rate": rates.false_negative_rate,
        "excluded": excluded,
    });
    emit_report("screen-stats", &body, text, output)?;
    Ok(Status::Ok)
}

fn serve(
    cli: &Cli,
    config: Option<&Path>,
    docs: Option<&Path>,
    keywords: Option<&Path>,
    addr: SocketAddr,
    ui: Option<PathBuf>,
    history: Option<PathBuf>,
) -> Result<Status> {
    let (docs, keywords, lexicon_dir, vectors, similarity, history) = match config {
        Some(path) => {
            let cfg = ProjectConfig::load(path)?;
            let default_history = path.parent().unwrap_or(Path::new(".")).join(".slrkit-history.jsonl");
            (
                cfg.documents,
                cfg.keywords,
                cfg.lexicon.or_else(|| cli.lexicon.clone()),
                cfg.vectors.or_else(|| cli.vectors.clone()),
                cfg.similarity,
                history.or(Some(default_history)),
            )
        }
        None => (
            docs.expect("required by clap").to_path_buf(),
            keywords.expect("required by clap").to_path_buf(),
            cli.lexicon.clone(),
            cli.vectors.clone(),
            None,
            history,
        ),
    };
    let lexicon = Arc::new(load_lexicon(lexicon_dir.as_deref())?);
    let kf = load_keywords(&keywords, Some(&lexicon))?;
    let resources = Resources {
        store: load_store(vectors.as_deref())?,
        config: similarity.unwrap_or(kf.config),
        documents: load_documents(&docs)?,
        lexicon,
    };
    let options = ServiceOptions {
        history_path: history,
        ui_dir: ui,
        max_text_bytes: 0,
    };
    let state = Arc::new(AppState::new(resources, kf.keywords, options)?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("cannot start the async runtime")?;
    eprintln!("serving on http://{addr}");
    runtime.block_on(slrkit_service::serve(state, addr))?;
    Ok(Status::Ok)
}
