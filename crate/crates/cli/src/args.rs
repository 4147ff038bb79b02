use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use spider_core::{Language, NodeKind};

#[derive(Debug, Parser)]
#[command(
    name = "spider",
    version,
    about = "Localize the code an issue refers to, using a code graph"
)]
pub struct Cli {
    /// TOML config file ([spider], [embedding], [llm], [paths] sections).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for parsing, embedding and filter calls.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a repository into a code graph.
    BuildGraph(BuildGraphArgs),
    /// Embed every candidate node of a graph into the embedding cache.
    Index(IndexArgs),
    /// Rank candidate nodes for an issue (or for every instance of a dataset).
    Retrieve(Box<RetrieveArgs>),
    /// Score retrieval results against gold patches.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Dense retrieval only.
    Der,
    /// BM25 retrieval only.
    Sr,
    /// Dense retrieval refined by graph exploration and the LLM filter.
    Spider,
    /// BM25 retrieval refined by graph exploration and the LLM filter.
    Spisr,
}

impl Mode {
    pub fn dense(self) -> bool {
        matches!(self, Mode::Der | Mode::Spider)
    }

    pub fn explores(self) -> bool {
        matches!(self, Mode::Spider | Mode::Spisr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Function,
    Class,
}

impl Granularity {
    pub fn kind(self) -> NodeKind {
        match self {
            Granularity::Function => NodeKind::Function,
            Granularity::Class => NodeKind::Class,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LanguageArg {
    Python,
    Java,
    Javascript,
    Typescript,
}

impl From<LanguageArg> for Language {
    fn from(l: LanguageArg) -> Self {
        match l {
            LanguageArg::Python => Language::Python,
            LanguageArg::Java => Language::Java,
            LanguageArg::Javascript => Language::JavaScript,
            LanguageArg::Typescript => Language::TypeScript,
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    /// Repository checkout to parse.
    pub repo: PathBuf,

    #[arg(long, value_enum)]
    pub language: LanguageArg,

    /// Where to write the graph (NDJSON). Defaults to [paths].graph.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Glob of repo-relative paths to skip; repeatable.
    #[arg(long, value_name = "GLOB")]
    pub ignore: Vec<String>,
}

#[derive(Debug, Args, Default)]
pub struct EmbeddingArgs {
    /// Embedding endpoint: an http(s) URL, or `hash:<dim>` for the offline
    /// hashing embedder.
    #[arg(long, env = "SPIDER_EMBED_ENDPOINT", value_name = "URL")]
    pub embed_endpoint: Option<String>,

    /// Embedding model name (also the cache namespace).
    #[arg(long, env = "SPIDER_EMBED_MODEL", value_name = "NAME")]
    pub embed_model: Option<String>,

    /// Persistent embedding cache (NDJSON). Defaults to [paths].cache.
    #[arg(long, value_name = "FILE")]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct LlmArgs {
    /// Chat-completions endpoint for the neighbor filter.
    #[arg(long, env = "SPIDER_LLM_ENDPOINT", value_name = "URL")]
    pub llm_endpoint: Option<String>,

    /// Chat model name.
    #[arg(long, env = "SPIDER_LLM_MODEL", value_name = "NAME")]
    pub llm_model: Option<String>,

    /// Scripted replies instead of a live model (JSON: {"default": ..., "replies": {...}}).
    #[arg(long, env = "SPIDER_LLM_MOCK", value_name = "FILE")]
    pub llm_mock: Option<PathBuf>,

    /// Sampling temperature for the filter calls [default: 0.1].
    #[arg(long)]
    pub temperature: Option<f64>,

    /// Token budget per filter call [default: 10000].
    #[arg(long, value_name = "TOKENS")]
    pub token_ceiling: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct SpiderArgs {
    /// Retrieval budget K [default: 20].
    #[arg(long)]
    pub k: Option<usize>,
    /// Similarity cut-off N for neighbors, N > K [default: 500].
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of centers C [default: 5].
    #[arg(long)]
    pub c: Option<usize>,
    /// Exploration depth d in hops [default: 4].
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Graph file to index. Defaults to [paths].graph.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub granularity: Option<Granularity>,

    #[command(flatten)]
    pub embedding: EmbeddingArgs,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    /// Graph file. Defaults to [paths].graph.
    #[arg(long, value_name = "FILE", conflicts_with = "instances")]
    pub graph: Option<PathBuf>,

    /// Issue text file (`-` for stdin).
    #[arg(long, value_name = "FILE", conflicts_with = "instances")]
    pub issue: Option<PathBuf>,

    /// Result JSON path; stdout when omitted.
    #[arg(long, short, value_name = "FILE", conflicts_with = "instances")]
    pub out: Option<PathBuf>,

    /// Dataset (NDJSON instances) to retrieve for in one go.
    #[arg(long, value_name = "FILE")]
    pub instances: Option<PathBuf>,

    /// Directory of prebuilt graphs named `<instance_id>.ndjson`; instances
    /// without one are built from their `repo` checkout.
    #[arg(long, value_name = "DIR", requires = "instances")]
    pub graphs: Option<PathBuf>,

    /// Output directory for per-instance results. Defaults to [paths].results.
    #[arg(long, value_name = "DIR", requires = "instances")]
    pub results: Option<PathBuf>,

    /// Retrieval mode [default: spider].
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,

    /// Node kind to retrieve [default: function].
    #[arg(long, value_enum)]
    pub granularity: Option<Granularity>,

    /// Include per-center exploration details in the output.
    #[arg(long)]
    pub trace: bool,

    #[command(flatten)]
    pub spider: SpiderArgs,

    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[command(flatten)]
    pub llm: LlmArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset (NDJSON instances).
    #[arg(long, value_name = "FILE")]
    pub instances: PathBuf,

    /// Directory holding `<instance_id>.json` results. Defaults to [paths].results.
    #[arg(long, value_name = "DIR")]
    pub results: Option<PathBuf>,

    /// Directory of prebuilt graphs named `<instance_id>.ndjson`.
    #[arg(long, value_name = "DIR")]
    pub graphs: Option<PathBuf>,

    /// Where to write reports. Defaults to [paths].out, then the results directory.
    #[arg(long, short, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Cut-off(s) to score at, comma separated [default: K].
    #[arg(long, value_delimiter = ',', value_name = "K")]
    pub k: Vec<usize>,

    /// Ground-truth granularity [default: function].
    #[arg(long, value_enum)]
    pub granularity: Option<Granularity>,

    /// Bootstrap seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,

    /// Bootstrap resamples.
    #[arg(long, default_value_t = 10_000)]
    pub resamples: usize,
}
