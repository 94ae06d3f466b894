//! `slrkit`: quote verification, semantic highlighting and agreement
//! statistics for LLM-assisted systematic literature reviews.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "slrkit", version, about)]
pub struct Cli {
    /// WordNet database directory (the `data.*` and `index.*` files).
    #[arg(long, global = true, env = "SLRKIT_WORDNET")]
    pub lexicon: Option<PathBuf>,

    /// Word vectors in text format (`word v1 … vd` per line).
    #[arg(long, global = true)]
    pub vectors: Option<PathBuf>,

    /// How input text is tagged.
    #[arg(long, global = true, value_enum, default_value_t = TaggerKind::Builtin)]
    pub tagger: TaggerKind,

    /// Worker threads for per-document work; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaggerKind {
    /// Rule-based tagger over the lexicon.
    Builtin,
    /// Input files are `surface<TAB>lemma<TAB>TAG` lines, one token each.
    Pretagged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HighlightFormat {
    Ansi,
    Html,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Highlight one document against a keyword file.
    Highlight {
        document: PathBuf,
        #[arg(long, short)]
        keywords: PathBuf,
        #[arg(long, value_enum, default_value_t = HighlightFormat::Ansi)]
        format: HighlightFormat,
        /// List the explanation of every span after the text.
        #[arg(long)]
        explain: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Highlighting rate of every document in a directory and the band check.
    Calibrate {
        corpus: PathBuf,
        #[arg(long, short)]
        keywords: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Check evidence quotes against the source documents.
    Verify {
        evidence: PathBuf,
        /// Directory of documents named after the records' paper ids.
        #[arg(long)]
        docs: PathBuf,
        #[arg(long, default_value_t = 90)]
        threshold: u32,
        #[arg(long)]
        case_fold: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Similarity of model and expert answers and correlation with expert scores.
    Compare {
        evidence: PathBuf,
        /// Precomputed answer embeddings (`paper:question:model|expert v1 … vd`).
        #[arg(long)]
        sentence_embeddings: Option<PathBuf>,
        /// Lowercase tokens before the word-vector lookup.
        #[arg(long)]
        case_fold: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Screening confusion counts and error rates from relevance labels.
    ScreenStats {
        evidence: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Run the calibration service.
    Serve {
        /// Project file naming documents, keywords and optional resources.
        #[arg(long, conflicts_with_all = ["docs", "keywords"])]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        docs: Option<PathBuf>,
        #[arg(long, short, required_unless_present = "config")]
        keywords: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Static UI bundle served at `/`.
        #[arg(long)]
        ui: Option<PathBuf>,
        /// Keyword history file; defaults to `.slrkit-history.jsonl` next to the project file.
        #[arg(long)]
        history: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    match commands::run(cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
