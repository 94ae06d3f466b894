//! Word vectors: plain-text loader, cosine similarity, token averages and
//! the vector fallback used by the highlighter.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("failed to read {}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("vector file {} is empty", .0.display())]
    Empty(PathBuf),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("vectors have different dimensions ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("similarity undefined: {0}")]
    Undefined(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for EmbeddingVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct VectorStore {
    dimension: usize,
    table: HashMap<String, EmbeddingVector>,
    duplicates: Vec<String>,
}

impl VectorStore {
    /// An empty store; every lookup misses.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_entries<I, S>(entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut store = Self::default();
        for (i, (word, v)) in entries.into_iter().enumerate() {
            store.insert(i + 1, word.into(), v)?;
        }
        Ok(store)
    }

    /// Reads a `word v1 v2 ... vd` file. A leading `count dim` header is
    /// detected and skipped. The dimension comes from the first entry;
    /// duplicate words keep the last vector and are reported by
    /// [`VectorStore::duplicates`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let store = Self::parse(&text).map_err(|e| match e {
            EmbeddingError::Empty(_) => EmbeddingError::Empty(path.to_path_buf()),
            other => other,
        })?;
        for word in &store.duplicates {
            log::warn!("{}: duplicate vector for `{word}`, keeping the last one", path.display());
        }
        Ok(store)
    }

    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut store = Self::default();
        let mut first = true;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if first {
                first = false;
                if rest.len() == 1 && word.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                    continue;
                }
            }
            let mut v = Vec::with_capacity(rest.len());
            for f in rest {
                let x: f64 = f.parse().map_err(|_| EmbeddingError::Malformed {
                    line: line_no,
                    reason: format!("`{f}` is not a number"),
                })?;
                if !x.is_finite() {
                    return Err(EmbeddingError::Malformed {
                        line: line_no,
                        reason: format!("non-finite component `{f}`"),
                    });
                }
                v.push(x);
            }
            store.insert(line_no, word.to_string(), v)?;
        }
        if store.table.is_empty() {
            return Err(EmbeddingError::Empty(PathBuf::new()));
        }
        Ok(store)
    }

    fn insert(&mut self, line: usize, word: String, v: Vec<f64>) -> Result<(), EmbeddingError> {
        if v.is_empty() {
            return Err(EmbeddingError::Malformed {
                line,
                reason: "entry without components".into(),
            });
        }
        if self.table.is_empty() && self.dimension == 0 {
            self.dimension = v.len();
        } else if v.len() != self.dimension {
            return Err(EmbeddingError::DimensionMismatch {
                line,
                expected: self.dimension,
                found: v.len(),
            });
        }
        if self.table.insert(word.clone(), EmbeddingVector(v)).is_some() {
            self.duplicates.push(word);
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Case-sensitive lookup.
    pub fn get(&self, word: &str) -> Option<&EmbeddingVector> {
        self.table.get(word)
    }

    /// Words that appeared more than once in the source file.
    pub fn duplicates(&self) -> &[String] {
        &self.duplicates
    }
}

/// `dot(a, b) / (|a|·|b|)`.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::LengthMismatch(a.dim(), b.dim()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::Undefined("zero vector"));
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Component-wise mean of the in-vocabulary words.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector {
    pub vector: EmbeddingVector,
    pub used: usize,
    pub skipped: usize,
}

/// Averages the vectors of `words` found in the store. Out-of-vocabulary
/// words are skipped and counted rather than treated as zero vectors.
pub fn mean_vector<S: AsRef<str>>(words: &[S], store: &VectorStore) -> Result<MeanVector, EmbeddingError> {
    let mut sum = vec![0.0; store.dimension()];
    let mut used = 0usize;
    let mut skipped = 0usize;
    for w in words {
        match store.get(w.as_ref()) {
            Some(v) => {
                for (acc, x) in sum.iter_mut().zip(v.as_slice()) {
                    *acc += x;
                }
                used += 1;
            }
            None => skipped += 1,
        }
    }
    if used == 0 {
        return Err(EmbeddingError::Undefined("no in-vocabulary word"));
    }
    let n = used as f64;
    Ok(MeanVector {
        vector: EmbeddingVector(sum.into_iter().map(|x| x / n).collect()),
        used,
        skipped,
    })
}

/// Vector similarity between a word and a keyword: 1 for identical
/// strings, the cosine of their vectors clamped below at 0 when both are in
/// the store, otherwise 0.
pub fn vec_similarity(word: &str, keyword: &str, store: &VectorStore) -> f64 {
    if word == keyword {
        return 1.0;
    }
    match (store.get(word), store.get(keyword)) {
        (Some(a), Some(b)) => cosine(a, b).map_or(0.0, |c| c.max(0.0)),
        _ => 0.0,
    }
}
