//! Agreement statistics between model and expert answers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{cosine, mean_vector, EmbeddingError, EmbeddingVector, VectorStore};
use crate::tagging::{Tag, Tagger, TaggingError};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no values")]
    Empty,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} pairs, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("correlation undefined: a series has zero variance")]
    ZeroVariance,
    #[error("correlation of magnitude 1 has degenerate bounds")]
    Degenerate,
    #[error("rate undefined: {0} is zero")]
    EmptyDenominator(&'static str),
    #[error("invalid range: lo {lo} must be below hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Tagging(#[from] TaggingError),
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> Result<(f64, f64), MetricsError> {
    if xs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricsError::TooFew { needed: 2, got: xs.len() });
    }
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if constant(xs) || constant(ys) {
        return Err(MetricsError::ZeroVariance);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation with a Fisher-transform confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
    /// Half the interval width divided by `z`, comparable to a standard
    /// deviation.
    pub scaled_uncertainty: f64,
    /// `tanh(atanh r ± z/√(n−3)) / z` evaluated literally, as (minus, plus).
    pub literal_bounds_over_z: (f64, f64),
    pub z: f64,
    pub n: usize,
}

pub const DEFAULT_Z: f64 = 1.96;

pub fn fisher_uncertainty(r: f64, n: usize, z: f64) -> Result<CorrelationEstimate, MetricsError> {
    if n < 4 {
        return Err(MetricsError::TooFew { needed: 4, got: n });
    }
    if r.abs() >= 1.0 {
        return Err(MetricsError::Degenerate);
    }
    let center = r.atanh();
    let half = z / ((n - 3) as f64).sqrt();
    let lower = (center - half).tanh();
    let upper = (center + half).tanh();
    Ok(CorrelationEstimate {
        r,
        lower,
        upper,
        scaled_uncertainty: (upper - lower) / (2.0 * z),
        literal_bounds_over_z: (lower / z, upper / z),
        z,
        n,
    })
}

/// Pearson correlation of paired highlighting rates with its interval. A
/// perfect correlation gets zero-width bounds.
pub fn highlight_correlation(expert_rates: &[f64], model_rates: &[f64]) -> Result<CorrelationEstimate, MetricsError> {
    correlation_estimate(expert_rates, model_rates, DEFAULT_Z)
}

/// [`pearson`] followed by [`fisher_uncertainty`]; `|r| = 1` yields
/// degenerate bounds equal to `r` instead of an error.
pub fn correlation_estimate(xs: &[f64], ys: &[f64], z: f64) -> Result<CorrelationEstimate, MetricsError> {
    let r = pearson(xs, ys)?;
    match fisher_uncertainty(r, xs.len(), z) {
        Err(MetricsError::Degenerate) => Ok(CorrelationEstimate {
            r,
            lower: r,
            upper: r,
            scaled_uncertainty: 0.0,
            literal_bounds_over_z: (r / z, r / z),
            z,
            n: xs.len(),
        }),
        other => other,
    }
}

/// Cosine of the token-average word vectors of two answers. Punctuation is
/// ignored; tokens are looked up by surface form, lowercased when
/// `case_fold` is set.
pub fn mean_vector_similarity(
    answer_a: &str,
    answer_b: &str,
    store: &VectorStore,
    tagger: &dyn Tagger,
    case_fold: bool,
) -> Result<f64, MetricsError> {
    let words = |text: &str| -> Result<Vec<String>, MetricsError> {
        Ok(tagger
            .tag(text)?
            .tokens
            .into_iter()
            .filter(|t| t.tag != Tag::Punct)
            .map(|t| if case_fold { t.text.to_lowercase() } else { t.text })
            .collect())
    };
    let a = mean_vector(&words(answer_a)?, store)?;
    let b = mean_vector(&words(answer_b)?, store)?;
    Ok(cosine(&a.vector, &b.vector)?)
}

pub fn sentence_embedding_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, MetricsError> {
    Ok(cosine(a, b)?)
}

/// Linear map of `[lo, hi]` onto `[0, 1]`, clamped.
pub fn rescale(score: f64, lo: f64, hi: f64) -> Result<f64, MetricsError> {
    if lo >= hi || !lo.is_finite() || !hi.is_finite() {
        return Err(MetricsError::InvalidRange { lo, hi });
    }
    Ok(((score - lo) / (hi - lo)).clamp(0.0, 1.0))
}

pub const RESCALE_LO: f64 = 0.7;
pub const RESCALE_HI: f64 = 1.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// False positive and false negative rates; each is undefined on its own
/// when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionRates {
    pub false_positive_rate: Option<f64>,
    pub false_negative_rate: Option<f64>,
}

pub fn confusion_rates(c: &Confusion) -> ConfusionRates {
    let rate = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    ConfusionRates {
        false_positive_rate: rate(c.fp, c.fp + c.tn),
        false_negative_rate: rate(c.fn_, c.fn_ + c.tp),
    }
}

pub fn false_positive_rate(c: &Confusion) -> Result<f64, MetricsError> {
    confusion_rates(c)
        .false_positive_rate
        .ok_or(MetricsError::EmptyDenominator("fp + tn"))
}

pub fn false_negative_rate(c: &Confusion) -> Result<f64, MetricsError> {
    confusion_rates(c)
        .false_negative_rate
        .ok_or(MetricsError::EmptyDenominator("fn + tp"))
}

/// Answer similarity scores for one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub mean_vector_score: Option<f64>,
    pub sentence_embedding_score: Option<f64>,
    /// Sentence embedding score mapped through [`rescale`].
    pub rescaled: Option<f64>,
}
