//! In-memory WordNet graph: synsets, hypernym edges, lemma relations and
//! Wu-Palmer similarity.
//!
//! The graph is built once by [`LexiconGraph::load`] from the standard
//! plain-text database layout (`index.{noun,verb,adj,adv}` and
//! `data.{noun,verb,adj,adv}`) and is immutable afterwards, so it can be
//! shared freely between threads.

mod parse;
mod pos;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pos::PartOfSpeech;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("failed to read {}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {reason}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("hypernym cycle through synset {0}")]
    Cycle(SynsetId),
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetId),
    #[error("cannot compare synsets across categories ({0} vs {1})")]
    CategoryMismatch(PartOfSpeech, PartOfSpeech),
}

/// Database key of a synset: its category plus the byte offset of its line
/// in the category's data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SynsetId {
    pub pos: PartOfSpeech,
    pub offset: u32,
}

impl SynsetId {
    pub fn new(pos: PartOfSpeech, offset: u32) -> Self {
        Self { pos, offset }
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}-{}", self.offset, self.pos.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synset {
    pub id: SynsetId,
    /// Lowercase lemmas in database order; multiword lemmas use `_`.
    pub lemmas: Vec<String>,
    /// Hypernyms and instance hypernyms.
    pub hypernyms: Vec<SynsetId>,
    pub gloss: String,
}

/// A specific lemma inside a synset (WordNet's "word number", 0-based here).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LemmaRef {
    pub synset: SynsetId,
    pub word: u16,
}

/// Lexical relations between individual lemmas.
#[derive(Debug, Default, Clone)]
pub struct LemmaRelationTable {
    pertainyms: HashMap<LemmaRef, Vec<LemmaRef>>,
    related_forms: HashMap<LemmaRef, Vec<LemmaRef>>,
}

impl LemmaRelationTable {
    /// Pertainym targets (`\` pointers) of a lemma.
    pub fn pertainyms(&self, lemma: LemmaRef) -> &[LemmaRef] {
        self.pertainyms.get(&lemma).map_or(&[], Vec::as_slice)
    }

    /// Derivationally related forms (`+` pointers) of a lemma.
    pub fn related_forms(&self, lemma: LemmaRef) -> &[LemmaRef] {
        self.related_forms.get(&lemma).map_or(&[], Vec::as_slice)
    }

    pub fn pertainym_count(&self) -> usize {
        self.pertainyms.values().map(Vec::len).sum()
    }

    pub fn related_form_count(&self) -> usize {
        self.related_forms.values().map(Vec::len).sum()
    }
}

/// Something that can tell whether a word form exists.
pub trait Vocabulary {
    fn contains_word(&self, word: &str) -> bool;
}

impl Vocabulary for HashSet<String> {
    fn contains_word(&self, word: &str) -> bool {
        self.contains(word)
    }
}

#[derive(Debug)]
pub struct LexiconGraph {
    synsets: HashMap<SynsetId, Synset>,
    index: HashMap<(String, PartOfSpeech), Vec<SynsetId>>,
    relations: LemmaRelationTable,
    depths: HashMap<SynsetId, u32>,
    ordered: HashMap<PartOfSpeech, Vec<SynsetId>>,
}

impl LexiconGraph {
    /// Loads all four categories from a WordNet 3.x `dict` directory.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let dir = dir.as_ref();
        let mut builder = Builder::default();
        // Check every file up front so a missing one is reported by name
        // before any parsing work happens.
        for pos in PartOfSpeech::ALL {
            for kind in ["index", "data"] {
                let path = dir.join(format!("{kind}.{}", pos.file_suffix()));
                if !path.is_file() {
                    return Err(LexiconError::MissingFile(path));
                }
            }
        }
        for pos in PartOfSpeech::ALL {
            let path = dir.join(format!("data.{}", pos.file_suffix()));
            builder.read_data(&path, pos)?;
        }
        for pos in PartOfSpeech::ALL {
            let path = dir.join(format!("index.{}", pos.file_suffix()));
            builder.read_index(&path, pos)?;
        }
        builder.finish()
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.synsets.get(&id)
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// All synset ids of one category, in file order.
    pub fn synset_ids(&self, pos: PartOfSpeech) -> &[SynsetId] {
        self.ordered.get(&pos).map_or(&[], Vec::as_slice)
    }

    pub fn hypernym_edge_count(&self) -> usize {
        self.synsets.values().map(|s| s.hypernyms.len()).sum()
    }

    pub fn relations(&self) -> &LemmaRelationTable {
        &self.relations
    }

    /// Senses of `lemma` in database sense order. `lemma` must already be
    /// canonical (lowercase, `_` for spaces); unknown lemmas give an empty
    /// slice.
    pub fn synsets_of(&self, lemma: &str, pos: PartOfSpeech) -> &[SynsetId] {
        self.index
            .get(&(lemma.to_string(), pos))
            .map_or(&[], Vec::as_slice)
    }

    pub fn contains(&self, lemma: &str, pos: PartOfSpeech) -> bool {
        !self.synsets_of(lemma, pos).is_empty()
    }

    /// Text of a lemma reference.
    pub fn lemma_text(&self, lemma: LemmaRef) -> Option<&str> {
        self.synsets
            .get(&lemma.synset)
            .and_then(|s| s.lemmas.get(lemma.word as usize))
            .map(String::as_str)
    }

    /// Length of the longest hypernym path from `id` up to a root, counting
    /// nodes, so a root has depth 1. Adjective and adverb synsets have no
    /// hypernyms and are all roots.
    pub fn depth(&self, id: SynsetId) -> Result<u32, LexiconError> {
        self.depths
            .get(&id)
            .copied()
            .ok_or(LexiconError::UnknownSynset(id))
    }

    /// `id` and every synset reachable through hypernym edges.
    pub fn ancestors(&self, id: SynsetId) -> HashSet<SynsetId> {
        let mut seen = HashSet::new();
        let mut stack = vec![id];
        while let Some(s) = stack.pop() {
            if !seen.insert(s) {
                continue;
            }
            if let Some(syn) = self.synsets.get(&s) {
                stack.extend(syn.hypernyms.iter().copied());
            }
        }
        seen
    }

    /// Wu-Palmer similarity `2·depth(lcs) / (depth(a) + depth(b))`.
    ///
    /// The LCS is the deepest common ancestor. Synsets from disjoint
    /// hierarchies hang under a virtual root of depth 1, which pushes both
    /// depths down by one. Adjectives and adverbs have no hierarchy: two
    /// distinct synsets of those categories score 0.
    pub fn wu_palmer(&self, a: SynsetId, b: SynsetId) -> Result<f64, LexiconError> {
        if a.pos != b.pos {
            return Err(LexiconError::CategoryMismatch(a.pos, b.pos));
        }
        self.depth(a)?;
        self.depth(b)?;
        if a == b {
            return Ok(1.0);
        }
        Ok(self.wu_palmer_with(a, &self.ancestors(a), b, &self.ancestors(b)))
    }

    /// [`wu_palmer`](Self::wu_palmer) with precomputed ancestor sets, for
    /// callers comparing the same synsets many times. Both ids must exist and
    /// share a category.
    pub(crate) fn wu_palmer_with(
        &self,
        a: SynsetId,
        ancestors_a: &HashSet<SynsetId>,
        b: SynsetId,
        ancestors_b: &HashSet<SynsetId>,
    ) -> f64 {
        debug_assert_eq!(a.pos, b.pos);
        if a == b {
            return 1.0;
        }
        if !a.pos.has_hierarchy() {
            return 0.0;
        }
        let da = self.depths[&a];
        let db = self.depths[&b];
        let (small, large) = if ancestors_a.len() <= ancestors_b.len() {
            (ancestors_a, ancestors_b)
        } else {
            (ancestors_b, ancestors_a)
        };
        let lcs_depth = small
            .iter()
            .filter(|s| large.contains(s))
            .map(|s| self.depths[s])
            .max();
        match lcs_depth {
            Some(d) => 2.0 * d as f64 / (da + db) as f64,
            None => 2.0 / (da + db + 2) as f64,
        }
    }
}

/// A word is known when it, or a regular inflection of a lemma, is in the
/// index under any category.
impl Vocabulary for LexiconGraph {
    fn contains_word(&self, word: &str) -> bool {
        let lemmatizer = crate::tagging::Lemmatizer::new(self);
        PartOfSpeech::ALL
            .iter()
            .any(|&p| !lemmatizer.candidates(word, p).is_empty())
    }
}

#[derive(Default)]
struct Builder {
    synsets: HashMap<SynsetId, Synset>,
    index: HashMap<(String, PartOfSpeech), Vec<SynsetId>>,
    pertainyms: HashMap<LemmaRef, Vec<LemmaRef>>,
    related_forms: HashMap<LemmaRef, Vec<LemmaRef>>,
    ordered: HashMap<PartOfSpeech, Vec<SynsetId>>,
    // (source file, line) of every pointer, for error reporting.
    pointer_origin: HashMap<SynsetId, (PathBuf, usize)>,
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl Builder {
    fn read_data(&mut self, path: &Path, pos: PartOfSpeech) -> Result<(), LexiconError> {
        let text = read(path)?;
        let mut byte_offset = 0usize;
        for (i, raw) in text.split_inclusive('\n').enumerate() {
            let line_start = byte_offset;
            byte_offset += raw.len();
            if raw.starts_with("  ") || raw.trim().is_empty() {
                continue;
            }
            let malformed = |reason: String| LexiconError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason,
            };
            let parsed = parse::parse_data_line(raw).map_err(malformed)?;
            if parsed.offset as usize != line_start {
                return Err(malformed(format!(
                    "synset offset {} does not match byte position {line_start}",
                    parsed.offset
                )));
            }
            if parsed.pos != pos {
                return Err(malformed(format!("synset of category {} in {pos} file", parsed.pos)));
            }
            let id = SynsetId::new(pos, parsed.offset);
            let mut hypernyms = Vec::new();
            for p in &parsed.pointers {
                let target = SynsetId::new(p.pos, p.offset);
                match p.symbol.as_str() {
                    "@" | "@i" => hypernyms.push(target),
                    "\\" | "+" => {
                        let table = if p.symbol == "\\" {
                            &mut self.pertainyms
                        } else {
                            &mut self.related_forms
                        };
                        let target_ref = LemmaRef {
                            synset: target,
                            word: p.target.saturating_sub(1),
                        };
                        let sources: Vec<u16> = if p.source == 0 {
                            (0..parsed.words.len() as u16).collect()
                        } else {
                            vec![p.source - 1]
                        };
                        for w in sources {
                            let entry = table.entry(LemmaRef { synset: id, word: w }).or_default();
                            if !entry.contains(&target_ref) {
                                entry.push(target_ref);
                            }
                        }
                    }
                    _ => {}
                }
            }
            self.pointer_origin.insert(id, (path.to_path_buf(), i + 1));
            self.ordered.entry(pos).or_default().push(id);
            self.synsets.insert(
                id,
                Synset {
                    id,
                    lemmas: parsed.words,
                    hypernyms,
                    gloss: parsed.gloss,
                },
            );
        }
        Ok(())
    }

    fn read_index(&mut self, path: &Path, pos: PartOfSpeech) -> Result<(), LexiconError> {
        let text = read(path)?;
        for (i, raw) in text.lines().enumerate() {
            if raw.starts_with("  ") || raw.trim().is_empty() {
                continue;
            }
            let malformed = |reason: String| LexiconError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason,
            };
            let parsed = parse::parse_index_line(raw).map_err(malformed)?;
            if parsed.pos != pos {
                return Err(malformed(format!("entry of category {} in {pos} file", parsed.pos)));
            }
            let mut ids = Vec::with_capacity(parsed.offsets.len());
            for off in parsed.offsets {
                let id = SynsetId::new(pos, off);
                if !self.synsets.contains_key(&id) {
                    return Err(malformed(format!("lemma `{}` points to unknown synset {id}", parsed.lemma)));
                }
                ids.push(id);
            }
            self.index.insert((parsed.lemma, pos), ids);
        }
        Ok(())
    }

    fn check_targets(&self) -> Result<(), LexiconError> {
        let dangling = |from: &SynsetId, to: SynsetId| {
            let (path, line) = self.pointer_origin[from].clone();
            LexiconError::Malformed {
                path,
                line,
                reason: format!("pointer to unknown synset {to}"),
            }
        };
        for syn in self.synsets.values() {
            for h in &syn.hypernyms {
                if !self.synsets.contains_key(h) {
                    return Err(dangling(&syn.id, *h));
                }
            }
        }
        for (src, targets) in self.pertainyms.iter().chain(self.related_forms.iter()) {
            for t in targets {
                let ok = self
                    .synsets
                    .get(&t.synset)
                    .is_some_and(|s| (t.word as usize) < s.lemmas.len());
                if !ok {
                    return Err(dangling(&src.synset, t.synset));
                }
            }
        }
        Ok(())
    }

    fn compute_depths(&self) -> Result<HashMap<SynsetId, u32>, LexiconError> {
        const IN_PROGRESS: u32 = 0;
        let mut depths: HashMap<SynsetId, u32> = HashMap::with_capacity(self.synsets.len());
        let mut ids: Vec<&SynsetId> = self.synsets.keys().collect();
        ids.sort();
        for &start in ids {
            if depths.contains_key(&start) {
                continue;
            }
            // Iterative post-order DFS; IN_PROGRESS marks the current path.
            let mut stack: Vec<(SynsetId, usize)> = vec![(start, 0)];
            depths.insert(start, IN_PROGRESS);
            while let Some(&mut (node, ref mut next_child)) = stack.last_mut() {
                let hypernyms = &self.synsets[&node].hypernyms;
                if *next_child < hypernyms.len() {
                    let child = hypernyms[*next_child];
                    *next_child += 1;
                    match depths.get(&child) {
                        Some(&IN_PROGRESS) => return Err(LexiconError::Cycle(child)),
                        Some(_) => {}
                        None => {
                            depths.insert(child, IN_PROGRESS);
                            stack.push((child, 0));
                        }
                    }
                } else {
                    let d = 1 + hypernyms.iter().map(|h| depths[h]).max().unwrap_or(0);
                    depths.insert(node, d);
                    stack.pop();
                }
            }
        }
        Ok(depths)
    }

    fn finish(self) -> Result<LexiconGraph, LexiconError> {
        self.check_targets()?;
        let depths = self.compute_depths()?;
        Ok(LexiconGraph {
            synsets: self.synsets,
            index: self.index,
            relations: LemmaRelationTable {
                pertainyms: self.pertainyms,
                related_forms: self.related_forms,
            },
            depths,
            ordered: self.ordered,
        })
    }
}
