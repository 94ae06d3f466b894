//! Thresholded word-to-keyword similarity: weighted synset extension through
//! pertainyms and derivationally related forms, extended Wu-Palmer scoring,
//! and a word-vector fallback.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{vec_similarity, VectorStore};
use crate::lexicon::{LemmaRef, LexiconGraph, PartOfSpeech, SynsetId};

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("{name} must lie in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
}

/// Weights and thresholds of the similarity decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityConfig {
    pub p_weight: f64,
    pub rf_weight: f64,
    pub wup_threshold: f64,
    pub vec_threshold: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            p_weight: 0.95,
            rf_weight: 0.95,
            wup_threshold: 0.8,
            vec_threshold: 0.95,
        }
    }
}

impl SimilarityConfig {
    /// Weights must lie in (0, 1]; thresholds in [0, 1] so that a zero
    /// threshold can switch a gate off.
    pub fn validate(&self) -> Result<(), SimilarityError> {
        let weights = [("p_weight", self.p_weight), ("rf_weight", self.rf_weight)];
        for (name, value) in weights {
            if !(value > 0.0 && value <= 1.0) {
                return Err(SimilarityError::OutOfRange { name, range: "(0, 1]", value });
            }
        }
        let thresholds = [("wup_threshold", self.wup_threshold), ("vec_threshold", self.vec_threshold)];
        for (name, value) in thresholds {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimilarityError::OutOfRange { name, range: "[0, 1]", value });
            }
        }
        Ok(())
    }
}

/// `source` reaches `target` with `weight`: 1 for the synset itself, the
/// configured relation weight for a one-step lemma relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedReach {
    pub source: SynsetId,
    pub weight: f64,
    pub target: SynsetId,
}

/// The pair of reaches that produced an extended Wu-Palmer score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub word: WeightedReach,
    pub keyword: WeightedReach,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    Wup,
    Vec,
    None,
}

impl SimilarityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityKind::Wup => "wup",
            SimilarityKind::Vec => "vec",
            SimilarityKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityVerdict {
    pub score: f64,
    pub kind: SimilarityKind,
    pub matched_keyword: Option<String>,
    pub witness: Option<Witness>,
}

impl SimilarityVerdict {
    pub fn none() -> Self {
        Self {
            score: 0.0,
            kind: SimilarityKind::None,
            matched_keyword: None,
            witness: None,
        }
    }

    pub fn is_match(&self) -> bool {
        self.kind != SimilarityKind::None
    }
}

/// Best extended Wu-Palmer score between a word and one keyword.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WupMatch {
    pub score: f64,
    pub witness: Option<Witness>,
}

/// One-step weighted extension of `synsets`.
///
/// Every synset reaches itself with weight 1. Each of its lemmas adds the
/// synsets of its pertainyms (weight `p_weight`) and of its derivationally
/// related forms (weight `rf_weight`). A target reached several ways from
/// the same source keeps the largest weight.
pub fn extend(synsets: &[SynsetId], lexicon: &LexiconGraph, config: &SimilarityConfig) -> Vec<WeightedReach> {
    let mut out: Vec<WeightedReach> = Vec::new();
    let mut position: HashMap<(SynsetId, SynsetId), usize> = HashMap::new();
    let mut add = |source: SynsetId, target: SynsetId, weight: f64| match position.get(&(source, target)) {
        Some(&i) => {
            if weight > out[i].weight {
                out[i].weight = weight;
            }
        }
        None => {
            position.insert((source, target), out.len());
            out.push(WeightedReach { source, weight, target });
        }
    };
    let relations = lexicon.relations();
    for &s in synsets {
        add(s, s, 1.0);
        let Some(synset) = lexicon.synset(s) else { continue };
        for word in 0..synset.lemmas.len() as u16 {
            let lemma = LemmaRef { synset: s, word };
            for t in relations.pertainyms(lemma) {
                add(s, t.synset, config.p_weight);
            }
            for t in relations.related_forms(lemma) {
                add(s, t.synset, config.rf_weight);
            }
        }
    }
    out
}

/// Synsets of a lemma across several categories, in category then sense order.
fn senses(lexicon: &LexiconGraph, lemma: &str, categories: &[PartOfSpeech]) -> Vec<SynsetId> {
    categories
        .iter()
        .flat_map(|&p| lexicon.synsets_of(lemma, p).iter().copied())
        .collect()
}

struct Extended {
    reaches: Vec<WeightedReach>,
    ancestors: HashMap<SynsetId, HashSet<SynsetId>>,
}

impl Extended {
    fn new(synsets: &[SynsetId], lexicon: &LexiconGraph, config: &SimilarityConfig) -> Self {
        let reaches = extend(synsets, lexicon, config);
        let mut ancestors = HashMap::new();
        for r in &reaches {
            ancestors.entry(r.target).or_insert_with(|| lexicon.ancestors(r.target));
        }
        Self { reaches, ancestors }
    }
}

fn best_pair(a: &Extended, b: &Extended, lexicon: &LexiconGraph) -> WupMatch {
    let mut best = WupMatch { score: 0.0, witness: None };
    for rw in &a.reaches {
        for rc in &b.reaches {
            if rw.target.pos != rc.target.pos {
                continue;
            }
            let weight = rw.weight * rc.weight;
            if weight <= best.score {
                continue;
            }
            let wup = lexicon.wu_palmer_with(
                rw.target,
                &a.ancestors[&rw.target],
                rc.target,
                &b.ancestors[&rc.target],
            );
            let score = weight * wup;
            if score > best.score {
                best = WupMatch {
                    score,
                    witness: Some(Witness { word: *rw, keyword: *rc }),
                };
            }
        }
    }
    best
}

/// Extended Wu-Palmer similarity of word `w` and keyword `c`, both looked
/// up under category `t`. Reached synsets of different categories are not
/// compared. Zero when either lemma is unknown.
pub fn wup_x(w: &str, c: &str, t: PartOfSpeech, lexicon: &LexiconGraph, config: &SimilarityConfig) -> WupMatch {
    Matcher::new(lexicon, config).wup_x(w, &[t], c, &[t])
}

/// Similarity verdict of `w` (category `t`) against `keywords`, all looked
/// up under `t`. See [`Matcher::similarity`] for the decision rule.
pub fn similarity<S: AsRef<str>>(
    w: &str,
    keywords: &[S],
    t: PartOfSpeech,
    store: &VectorStore,
    lexicon: &LexiconGraph,
    config: &SimilarityConfig,
) -> SimilarityVerdict {
    let matcher = Matcher::new(lexicon, config);
    let prepared = matcher.prepare(keywords, &[t]);
    matcher.similarity(w, t, &prepared, store)
}

/// Keywords with their synset extensions computed once.
pub struct PreparedKeywords {
    keywords: Vec<String>,
    extended: Vec<Extended>,
}

impl PreparedKeywords {
    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

/// Shared lexicon and configuration for repeated similarity queries.
#[derive(Clone, Copy)]
pub struct Matcher<'a> {
    lexicon: &'a LexiconGraph,
    config: &'a SimilarityConfig,
}

impl<'a> Matcher<'a> {
    pub fn new(lexicon: &'a LexiconGraph, config: &'a SimilarityConfig) -> Self {
        Self { lexicon, config }
    }

    pub fn config(&self) -> &SimilarityConfig {
        self.config
    }

    /// Extends the synsets of each keyword, looked up under `categories`.
    pub fn prepare<S: AsRef<str>>(&self, keywords: &[S], categories: &[PartOfSpeech]) -> PreparedKeywords {
        let keywords: Vec<String> = keywords.iter().map(|k| k.as_ref().to_string()).collect();
        let extended = keywords
            .iter()
            .map(|k| Extended::new(&senses(self.lexicon, k, categories), self.lexicon, self.config))
            .collect();
        PreparedKeywords { keywords, extended }
    }

    pub fn wup_x(&self, w: &str, w_categories: &[PartOfSpeech], c: &str, c_categories: &[PartOfSpeech]) -> WupMatch {
        let a = Extended::new(&senses(self.lexicon, w, w_categories), self.lexicon, self.config);
        let b = Extended::new(&senses(self.lexicon, c, c_categories), self.lexicon, self.config);
        best_pair(&a, &b, self.lexicon)
    }

    /// Verdict for lemma `w` of category `t`.
    ///
    /// The best extended Wu-Palmer score wins when it reaches the Wu-Palmer
    /// threshold and is at least the best vector score; otherwise the best
    /// vector score wins when it reaches the vector threshold; otherwise no
    /// match. Ties between keywords go to the earliest one.
    pub fn similarity(&self, w: &str, t: PartOfSpeech, keywords: &PreparedKeywords, store: &VectorStore) -> SimilarityVerdict {
        let word = Extended::new(self.lexicon.synsets_of(w, t), self.lexicon, self.config);
        let mut best_wup = WupMatch { score: 0.0, witness: None };
        let mut wup_keyword = None;
        let mut best_vec = 0.0;
        let mut vec_keyword = None;
        for (i, (kw, ext)) in keywords.keywords.iter().zip(&keywords.extended).enumerate() {
            let m = best_pair(&word, ext, self.lexicon);
            if m.score > best_wup.score {
                best_wup = m;
                wup_keyword = Some(i);
            }
            let v = vec_similarity(w, kw, store);
            if v > best_vec {
                best_vec = v;
                vec_keyword = Some(i);
            }
        }
        let cfg = self.config;
        if let Some(i) = wup_keyword.filter(|_| best_wup.score >= cfg.wup_threshold && best_wup.score >= best_vec) {
            SimilarityVerdict {
                score: best_wup.score,
                kind: SimilarityKind::Wup,
                matched_keyword: Some(keywords.keywords[i].clone()),
                witness: best_wup.witness,
            }
        } else if let Some(i) = vec_keyword.filter(|_| best_vec >= cfg.vec_threshold) {
            SimilarityVerdict {
                score: best_vec,
                kind: SimilarityKind::Vec,
                matched_keyword: Some(keywords.keywords[i].clone()),
                witness: None,
            }
        } else {
            SimilarityVerdict::none()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(SimilarityConfig::default().validate().is_ok());
    }

    #[test]
    fn rejects_zero_weight_and_large_threshold() {
        let cfg = SimilarityConfig { p_weight: 0.0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(SimilarityError::OutOfRange { name: "p_weight", .. })));
        let cfg = SimilarityConfig { vec_threshold: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = SimilarityConfig { wup_threshold: 0.0, vec_threshold: 0.0, ..Default::default() };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn none_verdict_has_zero_score() {
        let v = SimilarityVerdict::none();
        assert_eq!(v.score, 0.0);
        assert!(!v.is_match());
    }
}
