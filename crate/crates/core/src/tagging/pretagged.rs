//! Tab-separated pretagged token format.
//!
//! One token per line, `surface<TAB>lemma<TAB>TAG`, with a blank line
//! between sentences. The document source is rebuilt by joining tokens with
//! single spaces and sentences with `\n`.

use std::path::Path;

use super::{Span, Tag, TaggedDocument, TaggedToken, Tagger, TaggingError};

pub fn parse_pretagged(text: &str) -> Result<TaggedDocument, TaggingError> {
    let mut source = String::new();
    let mut tokens = Vec::new();
    let mut offset = 0usize;
    let mut pending_break = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            pending_break = !tokens.is_empty();
            continue;
        }
        let malformed = |reason: String| TaggingError::Malformed { line: line_no, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(malformed(format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let (surface, lemma, tag_str) = (fields[0], fields[1], fields[2].trim());
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(malformed("surface form must be a non-empty word".into()));
        }
        let tag: Tag = tag_str.parse().map_err(malformed)?;
        if lemma.is_empty() && tag != Tag::Punct {
            return Err(malformed("empty lemma".into()));
        }
        if !tokens.is_empty() {
            source.push(if pending_break { '\n' } else { ' ' });
            offset += 1;
        }
        pending_break = false;
        let len = surface.chars().count();
        source.push_str(surface);
        tokens.push(TaggedToken {
            text: surface.to_string(),
            lemma: if lemma.is_empty() { surface.to_string() } else { lemma.to_string() },
            tag,
            span: Span::new(offset, offset + len),
        });
        offset += len;
    }
    Ok(TaggedDocument::new(source, tokens))
}

pub fn ingest_pretagged(path: impl AsRef<Path>) -> Result<TaggedDocument, TaggingError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TaggingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_pretagged(&text)
}

/// Writes a document in the pretagged format. Sentences end after `.`, `!`
/// or `?` tokens.
pub fn export_pretagged(doc: &TaggedDocument) -> String {
    let mut out = String::new();
    for (i, t) in doc.tokens.iter().enumerate() {
        out.push_str(&t.text);
        out.push('\t');
        out.push_str(&t.lemma);
        out.push('\t');
        out.push_str(t.tag.as_str());
        out.push('\n');
        let terminal = t.tag == Tag::Punct && matches!(t.text.as_str(), "." | "!" | "?");
        if terminal && i + 1 < doc.tokens.len() {
            out.push('\n');
        }
    }
    out
}

/// Backend that treats its input text as pretagged TSV.
#[derive(Debug, Clone, Copy, Default)]
pub struct PretaggedTagger;

impl Tagger for PretaggedTagger {
    fn tag(&self, text: &str) -> Result<TaggedDocument, TaggingError> {
        parse_pretagged(text)
    }
}
