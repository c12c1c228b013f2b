//! `ragqa`: command-line front end for corpus ingestion, QA-pair mining,
//! indexing, question answering and evaluation.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ragqa::config::ENDPOINT_ENV;
use ragqa::ErrorClass;

#[derive(Parser, Debug)]
#[command(name = "ragqa", version, about = "Retrieval-augmented question answering over Portuguese corpora")]
struct Cli {
    /// JSON file with default paths and parameters; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    app_config: Option<PathBuf>,

    /// Raise log verbosity (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Collect encyclopedia articles under a category and chunk them.
    IngestWiki(IngestWikiArgs),
    /// Keyword- and date-filter news articles and chunk them.
    IngestNews(IngestNewsArgs),
    /// Select domain QA pairs with keyword rules.
    FilterQa(FilterQaArgs),
    /// Translate QA pairs through a translation provider.
    TranslateQa(TranslateQaArgs),
    /// Split QA pairs into train, validation and test files.
    SplitQa(SplitQaArgs),
    /// Build a BM25 index over passage files.
    BuildIndex(BuildIndexArgs),
    /// Print the top passages for a query.
    Retrieve(RetrieveArgs),
    /// Answer one question.
    Ask(AskArgs),
    /// Evaluate one configuration on a test split.
    Evaluate(EvaluateArgs),
    /// Evaluate a list of configurations and write a results table.
    RunGrid(RunGridArgs),
}

#[derive(Args, Debug)]
struct ChunkArgs {
    /// Words per passage.
    #[arg(long, default_value_t = ragqa::corpus::DEFAULT_PASSAGE_SIZE)]
    passage_size: usize,
    /// First document id to assign.
    #[arg(long, default_value_t = 0)]
    doc_id_start: u64,
    /// First passage id to assign.
    #[arg(long, default_value_t = 0)]
    passage_id_start: u64,
}

#[derive(Args, Debug)]
struct IngestWikiArgs {
    /// Article records (JSONL with page `id`, `title`, `body`).
    #[arg(long)]
    articles: PathBuf,
    /// Category graph as JSONL `{category, subcategories, articles}`.
    #[arg(long, conflicts_with_all = ["categorylinks", "id_map"], required_unless_present = "categorylinks")]
    graph: Option<PathBuf>,
    /// SQL dump of the category link table.
    #[arg(long, requires = "id_map")]
    categorylinks: Option<PathBuf>,
    /// Tab-separated page id to category title map.
    #[arg(long)]
    id_map: Option<PathBuf>,
    /// Root category for the traversal.
    #[arg(long)]
    root: String,
    /// Maximum number of articles to collect.
    #[arg(long, default_value_t = 1000)]
    limit: usize,
    /// Output documents JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Output passages JSONL.
    #[arg(long)]
    passages_out: PathBuf,
    /// Also write the parsed category graph as JSONL.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[command(flatten)]
    chunking: ChunkArgs,
}

#[derive(Args, Debug)]
struct IngestNewsArgs {
    /// News records (JSONL with `title`, `body`, `published_at`).
    #[arg(long = "in")]
    input: PathBuf,
    /// Keyword file: JSON object mapping keyword to exclusion words.
    #[arg(long)]
    keywords: PathBuf,
    /// Earliest publication date kept.
    #[arg(long, default_value_t = ragqa::corpus::DEFAULT_MIN_DATE)]
    min_date: NaiveDate,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    passages_out: PathBuf,
    /// Filter statistics as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    chunking: ChunkArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OriginArg {
    Paq,
    Msmarco,
}

#[derive(Args, Debug)]
struct FilterQaArgs {
    /// Rule file `{"M": [...], "G": [...], "U": [...], "E": [...]}`.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// QA pairs, TSV or JSONL (detected from the first line).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "paq")]
    origin: OriginArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProviderArg {
    Identity,
    Dictionary,
    Http,
}

#[derive(Args, Debug)]
struct TranslateQaArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Pairs that could not be translated, with the error.
    #[arg(long)]
    rejects: PathBuf,
    #[arg(long, value_enum, default_value = "http")]
    provider: ProviderArg,
    /// Word map JSON for the dictionary provider.
    #[arg(long, required_if_eq("provider", "dictionary"))]
    dictionary: Option<PathBuf>,
    /// Translation service URL for the http provider.
    #[arg(long, env = "RAGQA_TRANSLATE_ENDPOINT", required_if_eq("provider", "http"))]
    translate_endpoint: Option<String>,
    /// Extra attempts per text after a failure.
    #[arg(long, default_value_t = 2)]
    retries: u32,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
}

#[derive(Args, Debug)]
struct SplitQaArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Directory for qa_pairs.{train,validation,test}.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.70)]
    train: f64,
    #[arg(long, default_value_t = 0.15)]
    validation: f64,
    #[arg(long, default_value_t = 0.15)]
    test: f64,
}

#[derive(Args, Debug)]
struct BuildIndexArgs {
    /// Passage files to index; repeat to merge collections.
    #[arg(long, required = true)]
    passages: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct KbArgs {
    /// Index file written by `build-index`.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Passage texts; defaults to the copy stored next to the index.
    #[arg(long)]
    passages: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct RetrieveArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[arg(long)]
    query: String,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    ReaderOnly,
    RetrieverReader,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ReaderArg {
    Extractive,
    Remote,
}

#[derive(Args, Debug, Clone)]
struct RemoteArgs {
    /// Reader service base URL (overrides the config file and the
    /// environment variable).
    #[arg(long)]
    endpoint: Option<String>,
    /// Reader request timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
}

#[derive(Args, Debug)]
struct AskArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[arg(long)]
    question: String,
    #[arg(long, value_enum, default_value = "retriever-reader")]
    mode: ModeArg,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "extractive")]
    reader: ReaderArg,
    /// Reader input budget in whitespace tokens.
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Test split (JSONL pairs labelled `"split": "test"`).
    #[arg(long)]
    test: Option<PathBuf>,
    /// Experiment configuration JSON.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    kb: KbArgs,
    /// Report output.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum)]
    reader: Option<ReaderArg>,
    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Args, Debug)]
struct RunGridArgs {
    #[arg(long)]
    test: Option<PathBuf>,
    /// JSON array of experiment configurations.
    #[arg(long, conflicts_with = "canonical", required_unless_present = "canonical")]
    grid: Option<PathBuf>,
    /// Use the built-in nine-configuration grid.
    #[arg(long)]
    canonical: bool,
    /// Reader for the built-in grid.
    #[arg(long, value_enum, default_value = "extractive")]
    reader: ReaderArg,
    #[arg(long)]
    wiki_index: Option<PathBuf>,
    #[arg(long)]
    news_index: Option<PathBuf>,
    #[arg(long)]
    wiki_news_index: Option<PathBuf>,
    /// Directory for results.json and results_table.txt.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    remote: RemoteArgs,
}

/// Exit statuses. 2 is reserved for usage errors, which clap reports.
mod exit {
    pub const IO: u8 = 3;
    pub const INPUT: u8 = 4;
    pub const INDEX: u8 = 5;
    pub const READER: u8 = 6;
    pub const CONFIG: u8 = 7;
    pub const PARTIAL: u8 = 8;
}

#[derive(Debug)]
enum Failure {
    Core(ragqa::Error),
    /// The run finished but some records were rejected.
    Partial(String),
}

impl From<ragqa::Error> for Failure {
    fn from(e: ragqa::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) => match e.class() {
                ErrorClass::Io => exit::IO,
                ErrorClass::Input => exit::INPUT,
                ErrorClass::Index => exit::INDEX,
                ErrorClass::Reader => exit::READER,
                ErrorClass::Config => exit::CONFIG,
            },
            Failure::Partial(_) => exit::PARTIAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => e.fmt(f),
            Failure::Partial(msg) => f.write_str(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    log::debug!("reader endpoint variable: {ENDPOINT_ENV}");

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.code())
        }
    }
}
