//! Suffix-stripping lemmatizer whose candidates are checked against the
//! lexicon index.

use crate::lexicon::{LexiconGraph, PartOfSpeech};

const NOUN_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ses", "s"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("men", "man"),
    ("ies", "y"),
];

const VERB_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ies", "y"),
    ("es", "e"),
    ("es", ""),
    ("ed", "e"),
    ("ed", ""),
    ("ing", "e"),
    ("ing", ""),
];

const ADJ_RULES: &[(&str, &str)] = &[("er", ""), ("est", ""), ("er", "e"), ("est", "e")];

const IRREGULAR: &[(&str, PartOfSpeech, &str)] = {
    use PartOfSpeech::{Adjective as A, Noun as N, Verb as V};
    &[
        ("am", V, "be"),
        ("is", V, "be"),
        ("are", V, "be"),
        ("was", V, "be"),
        ("were", V, "be"),
        ("been", V, "be"),
        ("being", V, "be"),
        ("has", V, "have"),
        ("had", V, "have"),
        ("having", V, "have"),
        ("does", V, "do"),
        ("did", V, "do"),
        ("done", V, "do"),
        ("went", V, "go"),
        ("gone", V, "go"),
        ("said", V, "say"),
        ("made", V, "make"),
        ("ran", V, "run"),
        ("began", V, "begin"),
        ("begun", V, "begin"),
        ("brought", V, "bring"),
        ("thought", V, "think"),
        ("took", V, "take"),
        ("taken", V, "take"),
        ("found", V, "find"),
        ("gave", V, "give"),
        ("given", V, "give"),
        ("got", V, "get"),
        ("knew", V, "know"),
        ("known", V, "know"),
        ("led", V, "lead"),
        ("left", V, "leave"),
        ("meant", V, "mean"),
        ("saw", V, "see"),
        ("seen", V, "see"),
        ("shown", V, "show"),
        ("spent", V, "spend"),
        ("stood", V, "stand"),
        ("told", V, "tell"),
        ("understood", V, "understand"),
        ("wrote", V, "write"),
        ("written", V, "write"),
        ("grew", V, "grow"),
        ("grown", V, "grow"),
        ("fell", V, "fall"),
        ("fallen", V, "fall"),
        ("rose", V, "rise"),
        ("risen", V, "rise"),
        ("kept", V, "keep"),
        ("held", V, "hold"),
        ("paid", V, "pay"),
        ("sold", V, "sell"),
        ("built", V, "build"),
        ("fed", V, "feed"),
        ("children", N, "child"),
        ("men", N, "man"),
        ("women", N, "woman"),
        ("feet", N, "foot"),
        ("teeth", N, "tooth"),
        ("mice", N, "mouse"),
        ("geese", N, "goose"),
        ("analyses", N, "analysis"),
        ("criteria", N, "criterion"),
        ("phenomena", N, "phenomenon"),
        ("hypotheses", N, "hypothesis"),
        ("better", A, "good"),
        ("best", A, "good"),
        ("worse", A, "bad"),
        ("worst", A, "bad"),
    ]
};

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

#[derive(Debug, Clone, Copy)]
pub struct Lemmatizer<'a> {
    lexicon: &'a LexiconGraph,
}

impl<'a> Lemmatizer<'a> {
    pub fn new(lexicon: &'a LexiconGraph) -> Self {
        Self { lexicon }
    }

    /// All base-form candidates of `word` present in the lexicon under
    /// `pos`, best first: irregular forms, then the rest shortest first.
    /// The surface form itself counts when present.
    pub fn candidates(&self, word: &str, pos: PartOfSpeech) -> Vec<String> {
        let lower = word.to_lowercase().replace(' ', "_");
        let mut out: Vec<String> = Vec::new();
        let push = |cand: String, out: &mut Vec<String>| {
            if !cand.is_empty() && self.lexicon.contains(&cand, pos) && !out.contains(&cand) {
                out.push(cand);
            }
        };
        for (form, p, base) in IRREGULAR {
            if *form == lower && *p == pos {
                push((*base).to_string(), &mut out);
            }
        }
        let irregular = out.len();
        push(lower.clone(), &mut out);
        let rules: &[(&str, &str)] = match pos {
            PartOfSpeech::Noun => NOUN_RULES,
            PartOfSpeech::Verb => VERB_RULES,
            PartOfSpeech::Adjective => ADJ_RULES,
            PartOfSpeech::Adverb => &[],
        };
        for (suffix, replacement) in rules {
            if let Some(stem) = lower.strip_suffix(suffix) {
                push(format!("{stem}{replacement}"), &mut out);
                // fuelled -> fuel, stopped -> stop, bigger -> big
                let b = stem.as_bytes();
                if replacement.is_empty()
                    && b.len() >= 3
                    && b[b.len() - 1] == b[b.len() - 2]
                    && !is_vowel(b[b.len() - 1])
                {
                    push(stem[..stem.len() - 1].to_string(), &mut out);
                }
            }
        }
        out[irregular..].sort_by_key(|c| c.chars().count());
        out
    }

    pub fn lemma(&self, word: &str, pos: PartOfSpeech) -> Option<String> {
        self.candidates(word, pos).into_iter().next()
    }
}
