//! Loading of keyword files, evidence records, documents and sentence
//! embeddings, and persistence of run reports.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::EmbeddingVector;
use crate::highlighter::KeywordSet;
use crate::lexicon::{LexiconGraph, PartOfSpeech};
use crate::similarity::{SimilarityConfig, SimilarityError};
use crate::tagging::Lemmatizer;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("{path}: record {index}: {reason}")]
    Record {
        path: PathBuf,
        index: usize,
        reason: String,
    },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
    #[error("{path}: invalid similarity settings")]
    Config {
        path: PathBuf,
        source: SimilarityError,
    },
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parsed keyword file: the keywords, the similarity configuration after
/// header overrides, and any warnings raised while loading.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordFile {
    pub keywords: KeywordSet,
    pub config: SimilarityConfig,
    pub warnings: Vec<String>,
}

/// Lemma of a keyword in its section's categories, lowercase with `_` for
/// spaces. Unknown words are kept as written (lowercased).
pub fn canonical_keyword(word: &str, categories: &[PartOfSpeech], lexicon: Option<&LexiconGraph>) -> String {
    let lower = word.trim().to_lowercase().split_whitespace().collect::<Vec<_>>().join("_");
    if let Some(lex) = lexicon {
        let lem = Lemmatizer::new(lex);
        for &pos in categories {
            if let Some(l) = lem.lemma(&lower, pos) {
                return l;
            }
        }
    }
    lower
}

/// Reads a keyword file:
///
/// ```text
/// # optional similarity overrides before the first section
/// wup_threshold = 0.8
/// [entities]
/// health
/// [relations]
/// affect
/// [properties]
/// environmental
/// ```
///
/// `#` starts a comment. Keywords are canonicalized with `lexicon` when
/// given; duplicates within a section are dropped with a warning.
pub fn load_keywords(path: impl AsRef<Path>, lexicon: Option<&LexiconGraph>) -> Result<KeywordFile, CorpusError> {
    let path = path.as_ref();
    parse_keywords(&read(path)?, path, lexicon)
}

pub fn parse_keywords(text: &str, path: &Path, lexicon: Option<&LexiconGraph>) -> Result<KeywordFile, CorpusError> {
    let err = |line: usize, reason: String| CorpusError::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut keywords = KeywordSet::default();
    let mut config = SimilarityConfig::default();
    let mut warnings = Vec::new();
    let mut section: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = Some(match name.trim().to_lowercase().as_str() {
                "entities" => "entities",
                "relations" => "relations",
                "properties" => "properties",
                other => return Err(err(line_no, format!("unknown section `[{other}]`"))),
            });
            continue;
        }
        let Some(sec) = section else {
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(line_no, format!("`{line}` appears before any section header")));
            };
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("`{}` is not a number", value.trim())))?;
            match key.trim() {
                "p_weight" => config.p_weight = value,
                "rf_weight" => config.rf_weight = value,
                "wup_threshold" => config.wup_threshold = value,
                "vec_threshold" => config.vec_threshold = value,
                other => return Err(err(line_no, format!("unknown setting `{other}`"))),
            }
            continue;
        };
        let (list, categories): (&mut Vec<String>, &[PartOfSpeech]) = match sec {
            "entities" => (&mut keywords.entities, &[PartOfSpeech::Noun]),
            "relations" => (&mut keywords.relations, &[PartOfSpeech::Verb]),
            _ => (&mut keywords.properties, &[PartOfSpeech::Adjective, PartOfSpeech::Adverb]),
        };
        let kw = canonical_keyword(line, categories, lexicon);
        if list.contains(&kw) {
            let msg = format!("{}:{line_no}: duplicate keyword `{kw}` in [{sec}] ignored", path.display());
            log::warn!("{msg}");
            warnings.push(msg);
        } else {
            list.push(kw);
        }
    }
    if keywords.is_empty() {
        return Err(err(text.lines().count().max(1), "no keywords".into()));
    }
    config.validate().map_err(|source| CorpusError::Config {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(KeywordFile {
        keywords,
        config,
        warnings,
    })
}

/// Writes keywords in the format read by [`load_keywords`].
pub fn format_keywords(keywords: &KeywordSet) -> String {
    let mut out = String::new();
    for (name, list) in keywords.sections() {
        out.push_str(&format!("[{name}]\n"));
        for kw in list {
            out.push_str(kw);
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Relevant,
    Irrelevant,
}

/// Char range of the normalized document the model was shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSlice {
    pub start: usize,
    pub end: usize,
}

/// One model answer unit: a question about a paper, the quotes given as
/// evidence, and the final answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceRecord {
    pub paper_id: String,
    pub question_id: String,
    pub question: String,
    #[serde(default)]
    pub quotes: Vec<String>,
    pub model_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert_answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert_label: Option<Label>,
    /// Expert rating of the model answer, e.g. correctness in [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert_score: Option<f64>,
    /// Answered without quoting evidence.
    #[serde(default)]
    pub direct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_slice: Option<SourceSlice>,
}

impl EvidenceRecord {
    pub fn key(&self) -> String {
        format!("{}:{}", self.paper_id, self.question_id)
    }
}

/// Reads a JSON array of [`EvidenceRecord`]s.
pub fn load_evidence(path: impl AsRef<Path>) -> Result<Vec<EvidenceRecord>, CorpusError> {
    let path = path.as_ref();
    parse_evidence(&read(path)?, path)
}

pub fn parse_evidence(text: &str, path: &Path) -> Result<Vec<EvidenceRecord>, CorpusError> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| CorpusError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(values.len());
    for (index, v) in values.into_iter().enumerate() {
        let bad = |reason: String| CorpusError::Record {
            path: path.to_path_buf(),
            index,
            reason,
        };
        let rec: EvidenceRecord = serde_json::from_value(v).map_err(|e| bad(e.to_string()))?;
        if rec.quotes.is_empty() && !rec.direct {
            return Err(bad("no quotes and not marked direct".into()));
        }
        if let Some(s) = rec.source_slice {
            if s.start > s.end {
                return Err(bad(format!("source_slice start {} after end {}", s.start, s.end)));
            }
        }
        if !seen.insert(rec.key()) {
            return Err(bad(format!("duplicate paper_id/question_id `{}`", rec.key())));
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub name: String,
    pub text: String,
}

/// Documents of a directory, keyed by file stem. Only `.txt` and `.md`
/// files are read; the map is ordered by id.
pub fn load_documents(dir: impl AsRef<Path>) -> Result<BTreeMap<String, Document>, CorpusError> {
    let dir = dir.as_ref();
    let io = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let ext = path.extension().and_then(|e| e.to_str());
        if !path.is_file() || !matches!(ext, Some("txt" | "md")) {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            continue;
        };
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or(&id).to_string();
        if out.contains_key(&id) {
            return Err(CorpusError::Invalid {
                path: path.clone(),
                reason: format!("two documents share the id `{id}`"),
            });
        }
        let text = read(&path)?;
        out.insert(id.clone(), Document { id, name, text });
    }
    Ok(out)
}

/// Reads `record_id v1 … vd` lines. Ids must be unique and every vector
/// must have the same dimension.
pub fn load_sentence_embeddings(path: impl AsRef<Path>) -> Result<BTreeMap<String, EmbeddingVector>, CorpusError> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut out = BTreeMap::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let err = |reason: String| CorpusError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let mut fields = line.split_whitespace();
        let Some(id) = fields.next() else { continue };
        let values = fields
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(format!("`{f}` is not a finite number"))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.is_empty() {
            return Err(err(format!("`{id}` has no components")));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(err(format!("expected {d} components, found {}", values.len())));
            }
            _ => {}
        }
        if out.insert(id.to_string(), EmbeddingVector::new(values)).is_some() {
            return Err(err(format!("duplicate id `{id}`")));
        }
    }
    Ok(out)
}

/// Id under which the sentence embedding of a record's model or expert
/// answer is stored.
pub fn embedding_id(record: &EvidenceRecord, expert: bool) -> String {
    format!("{}:{}", record.key(), if expert { "expert" } else { "model" })
}

/// A saved run. Only `body` takes part in comparisons; `meta` holds
/// incidental data such as timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    pub body: serde_json::Value,
}

impl RunReport {
    pub fn new(command: impl Into<String>, body: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            meta: BTreeMap::new(),
            body,
        }
    }

    /// Canonical serialization of the body: sorted keys, shortest
    /// round-trip float formatting.
    pub fn comparable_body(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("json values serialize")
    }
}

pub fn save_report(report: &RunReport, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(report).expect("json values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_report(path: impl AsRef<Path>) -> Result<RunReport, CorpusError> {
    let path = path.as_ref();
    serde_json::from_str(&read(path)?).map_err(|e| CorpusError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })
}

/// Project file (TOML). Relative paths are resolved against the file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub documents: PathBuf,
    pub keywords: PathBuf,
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub similarity: Option<SimilarityConfig>,
    #[serde(default = "default_threshold")]
    pub audit_threshold: u32,
}

fn default_threshold() -> u32 {
    90
}

impl ProjectConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let mut cfg: ProjectConfig = toml::from_str(&read(path)?).map_err(|e| CorpusError::Invalid {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.documents);
        resolve(&mut cfg.keywords);
        cfg.vectors.as_mut().map(resolve);
        cfg.lexicon.as_mut().map(resolve);
        let mut required: Vec<&PathBuf> = vec![&cfg.documents, &cfg.keywords];
        required.extend(cfg.vectors.iter());
        required.extend(cfg.lexicon.iter());
        for p in required {
            if !p.exists() {
                return Err(CorpusError::Invalid {
                    path: path.to_path_buf(),
                    reason: format!("{} does not exist", p.display()),
                });
            }
        }
        if let Some(sim) = &cfg.similarity {
            sim.validate().map_err(|source| CorpusError::Config {
                path: path.to_path_buf(),
                source,
            })?;
        }
        Ok(cfg)
    }
}
