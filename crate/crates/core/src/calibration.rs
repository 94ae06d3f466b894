//! Corpus-level highlighting rates against the calibration target band.

use serde::{Deserialize, Serialize};

use crate::metrics::mean_std;

pub const TARGET_RATE: f64 = 0.4;
pub const TARGET_TOLERANCE: f64 = 0.1;

/// Whether a mean rate lies in `0.4 ± 0.1`, bounds included. A small
/// slack keeps 0.3 and 0.5 inside despite binary rounding.
pub fn in_band(mean: f64) -> bool {
    (mean - TARGET_RATE).abs() <= TARGET_TOLERANCE + 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandHint {
    InBand,
    /// Too many irrelevant words are highlighted.
    TooHigh,
    /// Relevant keywords are missing.
    TooLow,
}

impl BandHint {
    pub fn of(mean: f64) -> Self {
        if in_band(mean) {
            BandHint::InBand
        } else if mean > TARGET_RATE {
            BandHint::TooHigh
        } else {
            BandHint::TooLow
        }
    }

    pub fn message(self) -> &'static str {
        match self {
            BandHint::InBand => "within the target band",
            BandHint::TooHigh => "too many irrelevant words are highlighted; narrow the keywords",
            BandHint::TooLow => "relevant keywords are missing; broaden the keywords",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRate {
    pub id: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub documents: Vec<DocumentRate>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub in_band: bool,
    pub hint: Option<BandHint>,
    pub target: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CalibrationSummary {
    pub fn new(documents: Vec<DocumentRate>) -> Self {
        let rates: Vec<f64> = documents.iter().map(|d| d.rate).collect();
        let (mean, std) = match mean_std(&rates) {
            Ok((m, s)) => (Some(m), Some(s)),
            Err(_) => (None, None),
        };
        let warnings = if documents.is_empty() {
            vec!["no documents in the corpus".to_string()]
        } else {
            Vec::new()
        };
        Self {
            documents,
            mean,
            std,
            in_band: mean.is_some_and(in_band),
            hint: mean.map(BandHint::of),
            target: TARGET_RATE,
            tolerance: TARGET_TOLERANCE,
            warnings,
        }
    }
}
