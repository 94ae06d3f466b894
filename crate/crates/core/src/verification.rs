//! Fuzzy verification of quoted evidence against source documents.
//!
//! Text is first normalized (Unicode compatibility forms, dash and quote
//! variants, invisible characters, line-break hyphenation, whitespace), then
//! each quote is located by the best-scoring document window under a
//! Levenshtein ratio.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::EvidenceRecord;
use crate::lexicon::Vocabulary;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("record has no quotes")]
    NoQuotes,
    #[error("quote {0} is empty after normalization")]
    EmptyQuote(usize),
}

fn is_invisible(c: char) -> bool {
    matches!(c, '\u{200B}' | '\u{200C}' | '\u{200D}' | '\u{2060}' | '\u{FEFF}')
}

fn fold_punctuation(c: char) -> char {
    match c {
        '\u{2010}'..='\u{2015}' | '\u{2212}' | '\u{FE58}' | '\u{FE63}' | '\u{FF0D}' | '\u{2043}' => '-',
        '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' | '\u{02BC}' => '\'',
        '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' | '\u{00AB}' | '\u{00BB}' => '"',
        c => c,
    }
}

/// Removes soft hyphens and zero-width characters. A soft hyphen followed
/// by a line break swallows the break as well.
fn strip_invisible(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\u{00AD}' {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            if chars[i + 1..j].contains(&'\n') {
                i = j;
            } else {
                i += 1;
            }
            continue;
        }
        if !is_invisible(c) {
            out.push(c);
        }
        i += 1;
    }
    out
}

/// Joins words split by a hyphen at a line break. Without a vocabulary the
/// hyphen is always dropped; with one it is kept unless the joined word is
/// known ("trans-\nition" becomes "transition", "agri-\nfood" stays
/// "agri-food").
fn dehyphenate(text: &str, vocabulary: Option<&dyn Vocabulary>) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<char> = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '-' && out.last().is_some_and(|p| p.is_alphanumeric()) {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            let breaks_line = chars[i + 1..j].contains(&'\n');
            if breaks_line && j < chars.len() && chars[j].is_alphanumeric() {
                let left_start = out
                    .iter()
                    .rposition(|ch| !ch.is_alphanumeric())
                    .map_or(0, |p| p + 1);
                let right_end = (j..chars.len())
                    .find(|&k| !chars[k].is_alphanumeric())
                    .unwrap_or(chars.len());
                let left: String = out[left_start..].iter().collect();
                let right: String = chars[j..right_end].iter().collect();
                let keep_hyphen = vocabulary.is_some_and(|v| !v.contains_word(&format!("{left}{right}")));
                if keep_hyphen {
                    out.push('-');
                }
                i = j;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    out.into_iter().collect()
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Canonical form used for quote matching. Case is preserved and the
/// function is idempotent.
pub fn normalize(text: &str, vocabulary: Option<&dyn Vocabulary>) -> String {
    let visible = strip_invisible(text);
    let compat: String = visible.nfkc().map(fold_punctuation).collect();
    let joined = dehyphenate(&compat, vocabulary);
    collapse_whitespace(&joined).nfkc().collect()
}

fn lev_chars(a: &[char], b: &[char]) -> usize {
    if a.len() < b.len() {
        return lev_chars(b, a);
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// Edit distance in characters (insertions, deletions, substitutions).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    lev_chars(&a, &b)
}

fn ratio_from(distance: usize, len_a: usize, len_b: usize) -> u32 {
    let longest = len_a.max(len_b);
    if longest == 0 {
        return 100;
    }
    (100.0 * (1.0 - distance as f64 / longest as f64)).round() as u32
}

fn fold_char(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

/// Similarity 0–100: `round(100 · (1 − distance / longer length))`, and 100
/// for two empty strings.
pub fn ratio(a: &str, b: &str, case_fold: bool) -> u32 {
    let prep = |s: &str| -> Vec<char> {
        if case_fold {
            s.chars().map(fold_char).collect()
        } else {
            s.chars().collect()
        }
    };
    let (a, b) = (prep(a), prep(b));
    ratio_from(lev_chars(&a, &b), a.len(), b.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Flagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOptions {
    /// Minimum passing score; scores below it are flagged.
    pub threshold: u32,
    pub case_fold: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self {
            threshold: 90,
            case_fold: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub score: u32,
    /// Char range of the best window in the normalized document.
    pub matched_span: (usize, usize),
    pub normalized_quote: String,
    pub verdict: Verdict,
}

/// Starts and ends (char offsets) of the whitespace-separated tokens.
fn token_bounds(doc: &[char]) -> (Vec<usize>, Vec<usize>) {
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    let mut i = 0;
    while i < doc.len() {
        if doc[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < doc.len() && !doc[i].is_whitespace() {
            i += 1;
        }
        // also allow the word inside surrounding punctuation
        let inner_start = (start..i).find(|&k| doc[k].is_alphanumeric());
        let inner_end = (start..i).rev().find(|&k| doc[k].is_alphanumeric()).map(|k| k + 1);
        starts.push(start);
        if let Some(s) = inner_start.filter(|&s| s != start) {
            starts.push(s);
        }
        if let Some(e) = inner_end.filter(|&e| e != i) {
            ends.push(e);
        }
        ends.push(i);
    }
    (starts, ends)
}

/// Best window of `document` for `quote`.
///
/// Windows begin at a token start and end at a token end (either may sit
/// inside leading or trailing punctuation), with a length
/// within ±20% of the quote's. The highest ratio wins, the leftmost (then
/// shortest) on ties. A quote with no window of admissible length is
/// compared against the whole document. The quote is normalized here;
/// `document` is expected to be normalized already.
pub fn best_match(quote: &str, document: &str, options: &MatchOptions) -> MatchResult {
    let normalized_quote = normalize(quote, None);
    let prep = |s: &str| -> Vec<char> {
        if options.case_fold {
            s.chars().map(fold_char).collect()
        } else {
            s.chars().collect()
        }
    };
    let q = prep(&normalized_quote);
    let doc = prep(document);
    let min_len = (q.len() as f64 * 0.8).ceil() as usize;
    let max_len = (q.len() as f64 * 1.2).floor() as usize;
    let (starts, ends) = token_bounds(&doc);

    let mut best: Option<(u32, usize, usize)> = None;
    let mut column: Vec<usize> = vec![0; q.len() + 1];
    let mut end_idx = 0;
    for &s in &starts {
        while end_idx < ends.len() && ends[end_idx] <= s {
            end_idx += 1;
        }
        let admissible: Vec<usize> = ends[end_idx..]
            .iter()
            .copied()
            .take_while(|&e| e - s <= max_len)
            .filter(|&e| e - s >= min_len)
            .collect();
        let Some(&last) = admissible.last() else { continue };
        // column[k] = distance(doc[s..s+j], q[..k]) as j advances
        for (k, c) in column.iter_mut().enumerate() {
            *c = k;
        }
        let mut next = admissible.iter().peekable();
        for j in 1..=(last - s) {
            let dc = doc[s + j - 1];
            let mut diag = column[0];
            column[0] = j;
            for k in 1..=q.len() {
                let above = column[k];
                column[k] = if q[k - 1] == dc {
                    diag
                } else {
                    1 + diag.min(above).min(column[k - 1])
                };
                diag = above;
            }
            if next.peek().is_some_and(|&&e| e == s + j) {
                next.next();
                let score = ratio_from(column[q.len()], j, q.len());
                if best.is_none_or(|(b, _, _)| score > b) {
                    best = Some((score, s, s + j));
                }
            }
        }
        if best.is_some_and(|(b, _, _)| b == 100) {
            break;
        }
    }
    let (score, start, end) = best.unwrap_or_else(|| (ratio_from(lev_chars(&q, &doc), q.len(), doc.len()), 0, doc.len()));
    MatchResult {
        score,
        matched_span: (start, end),
        normalized_quote,
        verdict: if score >= options.threshold { Verdict::Pass } else { Verdict::Flagged },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceAudit {
    pub results: Vec<MatchResult>,
    pub mean: f64,
    /// The mean score is below the threshold.
    pub flagged: bool,
}

/// Checks every quote of `record` against `document` (already normalized).
///
/// With a source slice, a quote is matched inside the slice first and
/// against the whole document only when it fails there.
pub fn verify_evidence(
    record: &EvidenceRecord,
    document: &str,
    options: &MatchOptions,
) -> Result<EvidenceAudit, VerifyError> {
    if record.quotes.is_empty() {
        return Err(VerifyError::NoQuotes);
    }
    let slice = record.source_slice.map(|s| {
        let chars: Vec<char> = document.chars().collect();
        let end = s.end.min(chars.len());
        let start = s.start.min(end);
        (start, chars[start..end].iter().collect::<String>())
    });
    let mut results = Vec::with_capacity(record.quotes.len());
    for (i, quote) in record.quotes.iter().enumerate() {
        if normalize(quote, None).is_empty() {
            return Err(VerifyError::EmptyQuote(i));
        }
        let mut result = match &slice {
            Some((offset, text)) => {
                let mut r = best_match(quote, text, options);
                r.matched_span = (r.matched_span.0 + offset, r.matched_span.1 + offset);
                r
            }
            None => best_match(quote, document, options),
        };
        if slice.is_some() && result.verdict == Verdict::Flagged {
            let whole = best_match(quote, document, options);
            if whole.score > result.score {
                result = whole;
            }
        }
        results.push(result);
    }
    let mean = results.iter().map(|r| r.score as f64).sum::<f64>() / results.len() as f64;
    Ok(EvidenceAudit {
        flagged: mean < options.threshold as f64,
        results,
        mean,
    })
}
