use super::lemmatize::Lemmatizer;
use super::{tokenize, Span, Tag, TaggedDocument, TaggedToken, Tagger, TaggingError};
use crate::lexicon::{LexiconGraph, PartOfSpeech};

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "these", "those", "some", "any", "each", "every", "no", "all", "both", "either",
    "neither", "another", "my", "your", "his", "her", "its", "our", "their",
];

const AUX_CANDIDATES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had", "will", "would", "can", "could",
    "may", "might", "shall", "should", "must", "do", "does", "did",
];

const PRONOUNS: &[&str] = &[
    "i", "me", "you", "he", "him", "she", "it", "we", "us", "they", "them", "myself", "yourself", "himself",
    "herself", "itself", "ourselves", "themselves", "who", "whom", "whose", "which", "what", "that", "there",
    "something", "anything", "nothing", "everything", "someone", "anyone", "everyone", "one",
];

const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they", "who"];

const FUNCTION_WORDS: &[&str] = &[
    "in", "on", "at", "by", "for", "with", "from", "to", "of", "into", "onto", "over", "under", "about", "against",
    "between", "among", "amongst", "through", "throughout", "during", "before", "after", "above", "below",
    "towards", "toward", "upon", "within", "without", "across", "along", "around", "behind", "beyond", "despite",
    "except", "near", "per", "since", "than", "via", "and", "or", "but", "nor", "if", "because", "although",
    "though", "while", "whereas", "whether", "unless", "until", "as", "whereby",
    "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "hundred", "thousand", "million",
    "billion", "i.e", "e.g", "etc",
];

const ADVERBS: &[&str] = &[
    "not", "also", "very", "too", "so", "more", "most", "less", "least", "only", "just", "even", "still", "already",
    "often", "however", "then", "here", "now", "again", "rather", "quite", "almost", "perhaps", "out", "up", "down",
    "off", "further", "thus", "hence", "therefore", "yet",
];

fn in_list(list: &[&str], word: &str) -> bool {
    list.contains(&word)
}

#[derive(Debug, Clone, Default)]
struct Caps {
    noun: Option<String>,
    verb: Option<String>,
    adj: Option<String>,
    adv: Option<String>,
}

impl Caps {
    fn any(&self) -> bool {
        self.noun.is_some() || self.verb.is_some() || self.adj.is_some() || self.adv.is_some()
    }

    fn count(&self) -> usize {
        [&self.noun, &self.verb, &self.adj, &self.adv]
            .iter()
            .filter(|c| c.is_some())
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Punct,
    Det,
    AuxCandidate,
    Pronoun,
    Function,
    Adverb,
    Number,
    Open,
}

struct Word {
    text: String,
    lower: String,
    span: Span,
    class: Class,
    caps: Caps,
    sentence_start: bool,
}

/// Deterministic rule-based tagger backed by the lexicon index.
///
/// Ambiguous open-class words prefer NOUN, then VERB, ADJ and ADV unless a
/// context rule applies:
/// - an adjective-capable word before a noun-capable word, a preposition or
///   a hyphen is ADJ;
/// - after a determiner or adjective, a noun-capable word is NOUN;
/// - after an auxiliary, `to`, a subject pronoun, or an adverb that itself
///   follows a noun, a verb-capable word is VERB;
/// - an `-ed` form before `by` is VERB;
/// - `-ing`/`-ed` forms are VERB unless one of the rules above says
///   otherwise.
///
/// Auxiliaries (forms of be/have/do and the modals) are AUX when a VERB
/// follows within two tokens, VERB otherwise.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinTagger<'a> {
    lexicon: &'a LexiconGraph,
}

impl<'a> BuiltinTagger<'a> {
    pub fn new(lexicon: &'a LexiconGraph) -> Self {
        Self { lexicon }
    }

    fn lemmatizer(&self) -> Lemmatizer<'a> {
        Lemmatizer::new(self.lexicon)
    }

    fn caps(&self, lower: &str) -> Caps {
        let lem = self.lemmatizer();
        let caps = Caps {
            noun: lem.lemma(lower, PartOfSpeech::Noun),
            verb: lem.lemma(lower, PartOfSpeech::Verb),
            adj: lem.lemma(lower, PartOfSpeech::Adjective),
            adv: lem.lemma(lower, PartOfSpeech::Adverb),
        };
        // Only the bare or comparative forms of an adjective are adjectives;
        // "individuals" is not an adjective even though "individual" is.
        let adj = caps.adj.filter(|l| {
            l == lower || lower.ends_with("er") || lower.ends_with("est") || in_list(&["better", "best", "worse", "worst"], lower)
        });
        let adv = caps.adv.filter(|l| l == lower);
        Caps { adj, adv, ..caps }
    }

    pub fn tag_text(&self, text: &str) -> TaggedDocument {
        let chars: Vec<char> = text.chars().collect();
        let mut words: Vec<Word> = Vec::new();
        let mut sentence_start = true;
        for span in tokenize(text) {
            let surface: String = chars[span.start..span.end].iter().collect();
            let lower = surface.to_lowercase();
            let class = classify(&surface, &lower);
            let caps = if class == Class::Open { self.caps(&lower) } else { Caps::default() };
            let is_terminal = class == Class::Punct && matches!(surface.as_str(), "." | "!" | "?");
            words.push(Word {
                text: surface,
                lower,
                span,
                class,
                caps,
                sentence_start,
            });
            if is_terminal {
                sentence_start = true;
            } else if class != Class::Punct {
                sentence_start = false;
            }
        }

        let mut tags: Vec<Tag> = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            let tag = self.decide(&words, &tags, i);
            tags.push(tag);
        }
        // Auxiliaries need the tags to their right.
        for i in 0..words.len() {
            if words[i].class == Class::AuxCandidate {
                let verb_follows = (i + 1..(i + 3).min(words.len())).any(|j| tags[j] == Tag::Verb);
                tags[i] = if verb_follows { Tag::Aux } else { Tag::Verb };
            }
        }

        let lem = self.lemmatizer();
        let tokens = words
            .into_iter()
            .zip(tags)
            .map(|(w, tag)| {
                let lemma = match tag {
                    Tag::Punct => w.text.clone(),
                    Tag::Noun => w.caps.noun.clone().unwrap_or_else(|| w.lower.clone()),
                    Tag::Verb | Tag::Aux => w
                        .caps
                        .verb
                        .clone()
                        .or_else(|| lem.lemma(&w.lower, PartOfSpeech::Verb))
                        .unwrap_or_else(|| w.lower.clone()),
                    Tag::Adj => w.caps.adj.clone().unwrap_or_else(|| w.lower.clone()),
                    Tag::Adv => w.caps.adv.clone().unwrap_or_else(|| w.lower.clone()),
                    Tag::Propn | Tag::Det | Tag::Other => w.lower.clone(),
                };
                TaggedToken {
                    text: w.text,
                    lemma,
                    tag,
                    span: w.span,
                }
            })
            .collect();
        TaggedDocument::new(text.to_string(), tokens)
    }

    fn decide(&self, words: &[Word], tags: &[Tag], i: usize) -> Tag {
        let w = &words[i];
        match w.class {
            Class::Punct => return Tag::Punct,
            Class::Det => return Tag::Det,
            Class::Pronoun | Class::Function | Class::Number => return Tag::Other,
            Class::Adverb => return Tag::Adv,
            // Resolved in a second pass.
            Class::AuxCandidate => return Tag::Verb,
            Class::Open => {}
        }
        let caps = &w.caps;
        let capitalized = w.text.chars().next().is_some_and(char::is_uppercase);
        let all_caps = w.text.chars().count() > 1 && w.text.chars().all(|c| !c.is_lowercase());
        if all_caps && !caps.any() {
            return Tag::Propn;
        }
        if !caps.any() {
            if capitalized && !w.sentence_start {
                return Tag::Propn;
            }
            return suffix_guess(&w.lower);
        }
        if caps.count() == 1 {
            if caps.noun.is_some() {
                return Tag::Noun;
            }
            if caps.verb.is_some() {
                return Tag::Verb;
            }
            if caps.adj.is_some() {
                return Tag::Adj;
            }
            return Tag::Adv;
        }

        let prev = i.checked_sub(1).map(|p| (&words[p], tags[p]));
        let prev2 = i.checked_sub(2).map(|p| (&words[p], tags[p]));
        let next = words.get(i + 1);
        let next_nominal = next.is_some_and(|n| {
            n.class == Class::Open && (n.caps.noun.is_some() || (n.caps.adj.is_some() && n.caps.count() == 1))
                || n.class == Class::Open && !n.caps.any()
        });

        // passive participle: "distance traveled by food"
        if caps.verb.is_some() && w.lower.ends_with("ed") && next.is_some_and(|n| n.lower == "by") {
            return Tag::Verb;
        }
        if caps.adj.is_some() {
            // "novel occurrences", "rich in", "ultra - processed"
            let before_preposition = next.is_some_and(|n| n.class == Class::Function)
                && prev.is_none_or(|(_, t)| t != Tag::Det);
            let before_hyphen = next.is_some_and(|n| is_dash(&n.text))
                && words.get(i + 2).is_some_and(|n| n.class == Class::Open);
            if next_nominal || before_preposition || before_hyphen {
                return Tag::Adj;
            }
        }
        if let Some((pw, pt)) = prev {
            if matches!(pt, Tag::Det | Tag::Adj) && caps.noun.is_some() {
                return Tag::Noun;
            }
            let after_aux = pw.class == Class::AuxCandidate || pw.lower == "to";
            let after_subject = pw.class == Class::Pronoun && in_list(SUBJECT_PRONOUNS, &pw.lower);
            let after_adverb = pt == Tag::Adv
                && prev2.is_some_and(|(_, t)| matches!(t, Tag::Noun | Tag::Propn | Tag::Other));
            if caps.verb.is_some() && (after_aux || after_subject || after_adverb) {
                if pw.lower == "to" && next_nominal && caps.noun.is_some() {
                    return Tag::Noun;
                }
                return Tag::Verb;
            }
        }
        let participle = (w.lower.ends_with("ing") || w.lower.ends_with("ed"))
            && caps.verb.as_deref().is_some_and(|l| l != w.lower);
        if participle && caps.verb.is_some() {
            return Tag::Verb;
        }
        if caps.noun.is_some() {
            Tag::Noun
        } else if caps.verb.is_some() {
            Tag::Verb
        } else if caps.adj.is_some() {
            Tag::Adj
        } else {
            Tag::Adv
        }
    }
}

impl Tagger for BuiltinTagger<'_> {
    fn tag(&self, text: &str) -> Result<TaggedDocument, TaggingError> {
        Ok(self.tag_text(text))
    }
}

fn classify(surface: &str, lower: &str) -> Class {
    if !surface.chars().any(char::is_alphanumeric) {
        return Class::Punct;
    }
    if surface.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
        return Class::Number;
    }
    if in_list(DETERMINERS, lower) {
        Class::Det
    } else if in_list(AUX_CANDIDATES, lower) {
        Class::AuxCandidate
    } else if in_list(PRONOUNS, lower) {
        Class::Pronoun
    } else if in_list(FUNCTION_WORDS, lower) {
        Class::Function
    } else if in_list(ADVERBS, lower) {
        Class::Adverb
    } else {
        Class::Open
    }
}

pub(crate) fn is_dash(s: &str) -> bool {
    matches!(s, "-" | "\u{2010}" | "\u{2011}" | "\u{2012}" | "\u{2013}" | "\u{2014}")
}

fn suffix_guess(lower: &str) -> Tag {
    const NOUN: &[&str] = &["tion", "sion", "ness", "ment", "ity", "ism", "ance", "ence"];
    const VERB: &[&str] = &["ize", "ise", "ized", "ised", "izing", "ising", "ing", "ed"];
    const ADJ: &[&str] = &["al", "ous", "ive", "ful", "less", "able", "ible", "ic"];
    if lower.ends_with("ly") {
        Tag::Adv
    } else if NOUN.iter().any(|s| lower.ends_with(s)) {
        Tag::Noun
    } else if VERB.iter().any(|s| lower.ends_with(s)) {
        Tag::Verb
    } else if ADJ.iter().any(|s| lower.ends_with(s)) {
        Tag::Adj
    } else {
        Tag::Noun
    }
}
