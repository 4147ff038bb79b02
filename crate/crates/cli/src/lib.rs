//! Command-line front end: graph building, indexing, retrieval and evaluation.

mod args;
mod build;
mod config;
mod eval;
mod retrieve;

use spider_core::Error;

pub use args::{Cli, Command};
use config::FileConfig;

/// Raised by `eval` when some instances have no result file.
#[derive(Debug)]
pub struct Incomplete(pub Vec<String>);

impl std::fmt::Display for Incomplete {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "missing results for {} instance(s): {}",
            self.0.len(),
            self.0.join(", ")
        )
    }
}

impl std::error::Error for Incomplete {}

/// Process exit code for a failed run: 4 incomplete eval, 3 config/provider, 2 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Incomplete>().is_some() {
        return 4;
    }
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Config(_) | Error::Provider(_)) => 3,
        _ => 2,
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::BuildGraph(a) => build::build_graph(a, &cfg, cli.jobs),
        Command::Index(a) => build::index(a, &cfg, cli.jobs),
        Command::Retrieve(a) => retrieve::run(a, &cfg, cli.jobs),
        Command::Eval(a) => eval::run(a, &cfg, cli.jobs),
    }
}
