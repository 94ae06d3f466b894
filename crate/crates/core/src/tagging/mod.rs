//! Tokenization, part-of-speech tagging, lemmatization and noun chunks.
//!
//! Two backends produce a [`TaggedDocument`]: the built-in heuristic
//! [`BuiltinTagger`] (closed-class word lists, lexicon category lookup,
//! suffix heuristics and a few context rules) and [`PretaggedTagger`], which
//! reads externally tagged tokens in a tab-separated format.

mod builtin;
mod chunk;
mod lemmatize;
mod pretagged;
mod tokenize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builtin::BuiltinTagger;
pub(crate) use builtin::is_dash;
pub use chunk::noun_chunks;
pub use lemmatize::Lemmatizer;
pub use pretagged::{export_pretagged, ingest_pretagged, parse_pretagged, PretaggedTagger};
pub use tokenize::{tokenize, Span};

use crate::lexicon::PartOfSpeech;

#[derive(Debug, Error)]
pub enum TaggingError {
    #[error("failed to read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Noun,
    Propn,
    Verb,
    Aux,
    Adj,
    Adv,
    Det,
    Punct,
    Other,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Noun => "NOUN",
            Tag::Propn => "PROPN",
            Tag::Verb => "VERB",
            Tag::Aux => "AUX",
            Tag::Adj => "ADJ",
            Tag::Adv => "ADV",
            Tag::Det => "DET",
            Tag::Punct => "PUNCT",
            Tag::Other => "OTHER",
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, Tag::Noun | Tag::Propn)
    }

    /// Lexicon category a token with this tag is looked up under.
    pub fn category(self) -> Option<PartOfSpeech> {
        match self {
            Tag::Noun | Tag::Propn => Some(PartOfSpeech::Noun),
            Tag::Verb | Tag::Aux => Some(PartOfSpeech::Verb),
            Tag::Adj => Some(PartOfSpeech::Adjective),
            Tag::Adv => Some(PartOfSpeech::Adverb),
            Tag::Det | Tag::Punct | Tag::Other => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = String;

    /// Accepts the nine tags of this crate plus the remaining Universal
    /// Dependencies tags, which map to `OTHER` (`SYM` maps to `PUNCT`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "NOUN" => Tag::Noun,
            "PROPN" => Tag::Propn,
            "VERB" => Tag::Verb,
            "AUX" => Tag::Aux,
            "ADJ" => Tag::Adj,
            "ADV" => Tag::Adv,
            "DET" => Tag::Det,
            "PUNCT" | "SYM" => Tag::Punct,
            "OTHER" | "PRON" | "ADP" | "CCONJ" | "CONJ" | "SCONJ" | "NUM" | "PART" | "INTJ" | "X" | "SPACE" => {
                Tag::Other
            }
            other => return Err(format!("unknown tag `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub text: String,
    pub lemma: String,
    pub tag: Tag,
    pub span: Span,
}

/// A noun chunk over tokens `start..end`; `head` is the index of its final
/// noun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounChunk {
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

impl NounChunk {
    pub fn contains(&self, token: usize) -> bool {
        (self.start..self.end).contains(&token)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub source: String,
    pub tokens: Vec<TaggedToken>,
    pub chunks: Vec<NounChunk>,
}

impl TaggedDocument {
    /// Builds a document from tagged tokens and computes its noun chunks.
    pub fn new(source: String, tokens: Vec<TaggedToken>) -> Self {
        let chunks = noun_chunks(&tokens);
        Self { source, tokens, chunks }
    }

    /// Tokens, tags, lemmas and chunks agree; source layout and offsets may
    /// differ.
    pub fn same_content(&self, other: &TaggedDocument) -> bool {
        self.chunks == other.chunks
            && self.tokens.len() == other.tokens.len()
            && self
                .tokens
                .iter()
                .zip(&other.tokens)
                .all(|(a, b)| a.text == b.text && a.lemma == b.lemma && a.tag == b.tag)
    }

    pub fn chunk_of(&self, token: usize) -> Option<&NounChunk> {
        self.chunks.iter().find(|c| c.contains(token))
    }

    /// Surface text of tokens `start..end` joined as in the source.
    pub fn text_of(&self, start: usize, end: usize) -> String {
        if start >= end {
            return String::new();
        }
        let first = self.tokens[start].span.start;
        let last = self.tokens[end - 1].span.end;
        self.source.chars().skip(first).take(last - first).collect()
    }
}

/// A backend turning raw text into a [`TaggedDocument`].
pub trait Tagger {
    fn tag(&self, text: &str) -> Result<TaggedDocument, TaggingError>;
}
