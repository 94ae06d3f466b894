//! Building blocks for auditing LLM-assisted systematic literature reviews:
//! lexicon-backed semantic highlighting, fuzzy quote verification and
//! agreement statistics between model and expert answers.

pub mod calibration;
pub mod corpus;
pub mod embeddings;
pub mod highlighter;
pub mod lexicon;
pub mod metrics;
pub mod similarity;
pub mod tagging;
pub mod verification;
