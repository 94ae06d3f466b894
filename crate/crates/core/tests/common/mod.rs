#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use slrkit_core::lexicon::LexiconGraph;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn wordnet_dir() -> PathBuf {
    std::env::var_os("SLRKIT_WORDNET")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wordnet"))
}

pub fn full() -> &'static LexiconGraph {
    static LEX: OnceLock<LexiconGraph> = OnceLock::new();
    LEX.get_or_init(|| LexiconGraph::load(wordnet_dir()).expect("full lexicon loads"))
}

pub fn mini() -> &'static LexiconGraph {
    static LEX: OnceLock<LexiconGraph> = OnceLock::new();
    LEX.get_or_init(|| LexiconGraph::load(fixture("mini-wordnet")).expect("mini lexicon loads"))
}
