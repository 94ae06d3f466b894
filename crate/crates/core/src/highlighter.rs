//! Keyword-driven highlighting of tagged text.
//!
//! Tokens are routed to one keyword subset by grammatical role: words inside
//! noun chunks against the entities, verbs against the relations, and
//! adjectives or adverbs outside chunks against the properties. A chunk with
//! any matching word becomes an Entity; its remaining adjectives (and one
//! adjective directly in front of it) become Properties of it. Auxiliaries
//! right before a highlighted verb become Support.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::VectorStore;
use crate::lexicon::{LexiconGraph, PartOfSpeech};
use crate::similarity::{Matcher, PreparedKeywords, SimilarityConfig, SimilarityKind, SimilarityVerdict};
use crate::tagging::{Tag, TaggedDocument, Tagger, TaggingError};

#[derive(Debug, Error, PartialEq)]
pub enum HighlightError {
    #[error("document has no non-punctuation tokens")]
    EmptyDocument,
    #[error("token {0} is not highlighted")]
    NotHighlighted(usize),
    #[error("token {index} out of range ({len} tokens)")]
    TokenOutOfRange { index: usize, len: usize },
    #[error("unknown output format `{0}` (expected ansi, html or json)")]
    UnknownFormat(String),
    #[error("invalid highlight JSON: {0}")]
    Json(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum KeywordError {
    #[error("keyword set is empty")]
    Empty,
    #[error("{section}[{index}]: keyword is empty")]
    Blank { section: &'static str, index: usize },
    #[error("{section}[{index}]: duplicate keyword `{keyword}`")]
    Duplicate {
        section: &'static str,
        index: usize,
        keyword: String,
    },
}

/// Expert keywords: entities (nouns), relations (verbs) and properties
/// (adjectives or adverbs), as canonical lemmas.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeywordSet {
    #[serde(default)]
    pub entities: Vec<String>,
    #[serde(default)]
    pub relations: Vec<String>,
    #[serde(default)]
    pub properties: Vec<String>,
}

impl KeywordSet {
    pub fn new<S: Into<String>>(
        entities: impl IntoIterator<Item = S>,
        relations: impl IntoIterator<Item = S>,
        properties: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            entities: entities.into_iter().map(Into::into).collect(),
            relations: relations.into_iter().map(Into::into).collect(),
            properties: properties.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty() && self.properties.is_empty()
    }

    pub fn sections(&self) -> [(&'static str, &[String]); 3] {
        [
            ("entities", &self.entities),
            ("relations", &self.relations),
            ("properties", &self.properties),
        ]
    }

    /// Non-empty overall, no blank entries, no duplicates within a section.
    pub fn validate(&self) -> Result<(), KeywordError> {
        if self.is_empty() {
            return Err(KeywordError::Empty);
        }
        for (section, list) in self.sections() {
            for (index, kw) in list.iter().enumerate() {
                if kw.trim().is_empty() {
                    return Err(KeywordError::Blank { section, index });
                }
                if list[..index].contains(kw) {
                    return Err(KeywordError::Duplicate {
                        section,
                        index,
                        keyword: kw.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Entity,
    Relation,
    Property,
    Support,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Entity => "Entity",
            Role::Relation => "Relation",
            Role::Property => "Property",
            Role::Support => "Support",
        }
    }

    pub fn css_class(self) -> &'static str {
        match self {
            Role::Entity => "hl-entity",
            Role::Relation => "hl-relation",
            Role::Property => "hl-property",
            Role::Support => "hl-support",
        }
    }

    /// ANSI foreground color: red, blue, magenta, yellow.
    pub fn ansi_code(self) -> u8 {
        match self {
            Role::Entity => 31,
            Role::Relation => 34,
            Role::Property => 35,
            Role::Support => 33,
        }
    }
}

/// A keyword match of one word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarTo {
    pub keyword: String,
    pub score: f64,
    pub kind: SimilarityKind,
}

impl SimilarTo {
    fn from_verdict(v: &SimilarityVerdict) -> Option<Self> {
        Some(Self {
            keyword: v.matched_keyword.clone()?,
            score: v.score,
            kind: v.kind,
        })
    }
}

impl fmt::Display for SimilarTo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimilarTo('{}', {:.2}, '{}')", self.keyword, self.score, self.kind.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form")]
pub enum Explanation {
    SimilarTo(SimilarTo),
    /// A noun chunk highlighted because of the listed parts.
    #[serde(rename = "NCP")]
    Ncp { text: String, parts: Vec<SimilarTo> },
    /// Highlighted because it belongs to the span at token `target`.
    SupportOf { target: usize },
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Explanation::SimilarTo(s) => write!(f, "{s}"),
            Explanation::Ncp { text, parts } => {
                write!(f, "NCP({text}, [")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("])")
            }
            Explanation::SupportOf { target } => write!(f, "SupportOf({target})"),
        }
    }
}

/// Tokens `start..end` highlighted in `role`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightSpan {
    pub start: usize,
    pub end: usize,
    pub role: Role,
    pub score: f64,
    pub explanation: Explanation,
}

impl HighlightSpan {
    pub fn contains(&self, token: usize) -> bool {
        (self.start..self.end).contains(&token)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightedDocument {
    pub doc: TaggedDocument,
    /// Ordered by token position, never overlapping.
    pub spans: Vec<HighlightSpan>,
    /// Highlighted share of the non-punctuation tokens; 0 when there are none.
    pub rate: f64,
}

impl HighlightedDocument {
    pub fn span_at(&self, token: usize) -> Option<&HighlightSpan> {
        self.spans.iter().find(|s| s.contains(token))
    }

    pub fn role_of(&self, token: usize) -> Option<Role> {
        self.span_at(token).map(|s| s.role)
    }
}

fn counts(doc: &TaggedDocument, spans: &[HighlightSpan]) -> (usize, usize) {
    let mut total = 0;
    let mut marked = 0;
    for (i, t) in doc.tokens.iter().enumerate() {
        if t.tag == Tag::Punct {
            continue;
        }
        total += 1;
        if spans.iter().any(|s| s.contains(i)) {
            marked += 1;
        }
    }
    (marked, total)
}

/// Highlighted non-punctuation tokens over all non-punctuation tokens.
pub fn highlighting_rate(doc: &HighlightedDocument) -> Result<f64, HighlightError> {
    match counts(&doc.doc, &doc.spans) {
        (_, 0) => Err(HighlightError::EmptyDocument),
        (marked, total) => Ok(marked as f64 / total as f64),
    }
}

/// Explanation string of the span covering token `index`.
pub fn explain(doc: &HighlightedDocument, index: usize) -> Result<String, HighlightError> {
    if index >= doc.doc.tokens.len() {
        return Err(HighlightError::TokenOutOfRange {
            index,
            len: doc.doc.tokens.len(),
        });
    }
    doc.span_at(index)
        .map(|s| s.explanation.to_string())
        .ok_or(HighlightError::NotHighlighted(index))
}

/// Highlighter with keyword extensions computed once, reusable across
/// documents.
pub struct Highlighter<'a> {
    matcher: Matcher<'a>,
    store: &'a VectorStore,
    entities: PreparedKeywords,
    relations: PreparedKeywords,
    properties: PreparedKeywords,
}

const PROPERTY_CATEGORIES: [PartOfSpeech; 2] = [PartOfSpeech::Adjective, PartOfSpeech::Adverb];

impl<'a> Highlighter<'a> {
    pub fn new(
        keywords: &KeywordSet,
        lexicon: &'a LexiconGraph,
        store: &'a VectorStore,
        config: &'a SimilarityConfig,
    ) -> Self {
        let matcher = Matcher::new(lexicon, config);
        Self {
            entities: matcher.prepare(&keywords.entities, &[PartOfSpeech::Noun]),
            relations: matcher.prepare(&keywords.relations, &[PartOfSpeech::Verb]),
            properties: matcher.prepare(&keywords.properties, &PROPERTY_CATEGORIES),
            matcher,
            store,
        }
    }

    /// Tags `text` and highlights it.
    pub fn highlight_text(&self, text: &str, tagger: &dyn Tagger) -> Result<HighlightedDocument, TaggingError> {
        Ok(self.highlight(tagger.tag(text)?))
    }

    pub fn highlight(&self, doc: TaggedDocument) -> HighlightedDocument {
        let mut memo: HashMap<(String, PartOfSpeech, Role), SimilarityVerdict> = HashMap::new();
        let mut verdict = |lemma: &str, category: PartOfSpeech, role: Role| -> SimilarityVerdict {
            let key = (lemma.to_lowercase(), category, role);
            if let Some(v) = memo.get(&key) {
                return v.clone();
            }
            let keywords = match role {
                Role::Entity => &self.entities,
                Role::Relation => &self.relations,
                _ => &self.properties,
            };
            let v = if keywords.is_empty() {
                SimilarityVerdict::none()
            } else {
                self.matcher.similarity(&key.0, category, keywords, self.store)
            };
            memo.insert(key, v.clone());
            v
        };

        let n = doc.tokens.len();
        let mut roles: Vec<Option<(Role, f64, Explanation)>> = vec![None; n];
        let mut entity_groups: Vec<(usize, usize, f64, Explanation)> = Vec::new();

        for chunk in &doc.chunks {
            let mut parts = Vec::new();
            let mut matched = vec![false; chunk.end - chunk.start];
            for i in chunk.start..chunk.end {
                let t = &doc.tokens[i];
                let category = match t.tag {
                    Tag::Noun | Tag::Propn => PartOfSpeech::Noun,
                    Tag::Adj => PartOfSpeech::Adjective,
                    _ => continue,
                };
                let v = verdict(&t.lemma, category, Role::Entity);
                if let Some(s) = SimilarTo::from_verdict(&v) {
                    matched[i - chunk.start] = true;
                    parts.push(s);
                }
            }
            if parts.is_empty() {
                continue;
            }
            let first = (chunk.start..chunk.end)
                .find(|&i| doc.tokens[i].tag.is_nominal() || matched[i - chunk.start])
                .unwrap_or(chunk.head);
            let score = parts.iter().map(|p| p.score).fold(0.0, f64::max);
            let text = doc.text_of(first, chunk.end);
            let explanation = Explanation::Ncp { text, parts };
            // Adjectives ahead of the entity part that did not match
            // themselves describe the entity.
            for (t, role) in doc.tokens[chunk.start..first].iter().zip(&mut roles[chunk.start..first]) {
                if t.tag == Tag::Adj {
                    *role = Some((Role::Property, score, Explanation::SupportOf { target: chunk.head }));
                }
            }
            // An adjective just before the chunk, across dashes and quotes:
            // "ultra - processed food", "such 'holes'".
            let mut j = chunk.start;
            while j > 0 {
                j -= 1;
                let t = &doc.tokens[j];
                if t.tag == Tag::Punct && is_connector(&t.text) {
                    continue;
                }
                if t.tag == Tag::Adj && doc.chunk_of(j).is_none() {
                    roles[j] = Some((Role::Property, score, Explanation::SupportOf { target: chunk.head }));
                }
                break;
            }
            entity_groups.push((first, chunk.end, score, explanation));
        }

        let in_chunk: Vec<bool> = (0..n).map(|i| doc.chunk_of(i).is_some()).collect();
        for (i, t) in doc.tokens.iter().enumerate() {
            let (role, category) = match t.tag {
                Tag::Verb => (Role::Relation, PartOfSpeech::Verb),
                Tag::Adj if !in_chunk[i] => (Role::Property, PartOfSpeech::Adjective),
                Tag::Adv => (Role::Property, PartOfSpeech::Adverb),
                _ => continue,
            };
            let v = verdict(&t.lemma, category, role);
            if let Some(s) = SimilarTo::from_verdict(&v) {
                roles[i] = Some((role, v.score, Explanation::SimilarTo(s)));
            }
        }

        for i in 0..n {
            if doc.tokens[i].tag != Tag::Aux {
                continue;
            }
            let target = (i + 1..(i + 3).min(n))
                .find(|&j| matches!(&roles[j], Some((Role::Relation, ..))));
            if let Some(j) = target {
                let score = roles[j].as_ref().map_or(0.0, |r| r.1);
                roles[i] = Some((Role::Support, score, Explanation::SupportOf { target: j }));
            }
        }

        let mut spans: Vec<HighlightSpan> = entity_groups
            .into_iter()
            .map(|(start, end, score, explanation)| HighlightSpan {
                start,
                end,
                role: Role::Entity,
                score,
                explanation,
            })
            .collect();
        for (i, r) in roles.into_iter().enumerate() {
            if let Some((role, score, explanation)) = r {
                if spans.iter().any(|s| s.contains(i)) {
                    continue;
                }
                spans.push(HighlightSpan {
                    start: i,
                    end: i + 1,
                    role,
                    score,
                    explanation,
                });
            }
        }
        spans.sort_by_key(|s| s.start);
        let (marked, total) = counts(&doc, &spans);
        let rate = if total == 0 { 0.0 } else { marked as f64 / total as f64 };
        HighlightedDocument { doc, spans, rate }
    }
}

fn is_connector(s: &str) -> bool {
    crate::tagging::is_dash(s) || matches!(s, "'" | "\"" | "\u{2018}" | "\u{2019}" | "\u{201C}" | "\u{201D}")
}

/// One-shot highlighting; see [`Highlighter`] for repeated use.
pub fn highlight(
    doc: TaggedDocument,
    keywords: &KeywordSet,
    store: &VectorStore,
    lexicon: &LexiconGraph,
    config: &SimilarityConfig,
) -> HighlightedDocument {
    Highlighter::new(keywords, lexicon, store, config).highlight(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ansi,
    Html,
    Json,
}

impl std::str::FromStr for Format {
    type Err = HighlightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ansi" => Ok(Format::Ansi),
            "html" => Ok(Format::Html),
            "json" => Ok(Format::Json),
            other => Err(HighlightError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn render(doc: &HighlightedDocument, format: Format) -> String {
    match format {
        Format::Ansi => render_ansi(doc),
        Format::Html => render_html(doc),
        Format::Json => render_json(doc),
    }
}

/// Char range of tokens `start..end` in the source.
fn char_range(doc: &TaggedDocument, start: usize, end: usize) -> (usize, usize) {
    (doc.tokens[start].span.start, doc.tokens[end - 1].span.end)
}

/// Splits the source into plain and highlighted pieces.
fn segments(doc: &HighlightedDocument) -> Vec<(String, Option<&HighlightSpan>)> {
    let chars: Vec<char> = doc.doc.source.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    for span in &doc.spans {
        let (a, b) = char_range(&doc.doc, span.start, span.end);
        if a > pos {
            out.push((chars[pos..a].iter().collect(), None));
        }
        out.push((chars[a..b].iter().collect(), Some(span)));
        pos = b;
    }
    if pos < chars.len() {
        out.push((chars[pos..].iter().collect(), None));
    }
    out
}

fn render_ansi(doc: &HighlightedDocument) -> String {
    let mut out = String::new();
    for (text, span) in segments(doc) {
        match span {
            Some(s) => out.push_str(&format!("\x1b[{}m{text}\x1b[0m", s.role.ansi_code())),
            None => out.push_str(&text),
        }
    }
    out
}

pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// HTML fragment: highlighted pieces become `<span class="hl-…" title="…">`.
fn render_html(doc: &HighlightedDocument) -> String {
    let mut out = String::new();
    for (text, span) in segments(doc) {
        match span {
            Some(s) => out.push_str(&format!(
                "<span class=\"{}\" title=\"{}\">{}</span>",
                s.role.css_class(),
                escape_html(&s.explanation.to_string()),
                escape_html(&text)
            )),
            None => out.push_str(&escape_html(&text)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonSpan {
    pub start_token: usize,
    pub end_token: usize,
    /// Char offsets into `source`.
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub role: Role,
    pub score: f64,
    pub explanation: String,
    pub detail: Explanation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub source: String,
    pub rate: f64,
    pub tokens: usize,
    pub spans: Vec<JsonSpan>,
}

pub fn json_report(doc: &HighlightedDocument) -> JsonReport {
    let spans = doc
        .spans
        .iter()
        .map(|s| {
            let (start, end) = char_range(&doc.doc, s.start, s.end);
            JsonSpan {
                start_token: s.start,
                end_token: s.end,
                start,
                end,
                text: doc.doc.text_of(s.start, s.end),
                role: s.role,
                score: s.score,
                explanation: s.explanation.to_string(),
                detail: s.explanation.clone(),
            }
        })
        .collect();
    JsonReport {
        source: doc.doc.source.clone(),
        rate: doc.rate,
        tokens: doc.doc.tokens.len(),
        spans,
    }
}

fn render_json(doc: &HighlightedDocument) -> String {
    let mut s = serde_json::to_string_pretty(&json_report(doc)).expect("report serializes");
    s.push('\n');
    s
}

/// Spans recovered from [`Format::Json`] output.
pub fn parse_json(text: &str) -> Result<Vec<HighlightSpan>, HighlightError> {
    let report: JsonReport = serde_json::from_str(text).map_err(|e| HighlightError::Json(e.to_string()))?;
    Ok(report
        .spans
        .into_iter()
        .map(|s| HighlightSpan {
            start: s.start_token,
            end: s.end_token,
            role: s.role,
            score: s.score,
            explanation: s.detail,
        })
        .collect())
}
