//! Optional TOML config file. Every value here is a fallback: command-line
//! flags and environment variables win.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;
use spider_core::Error;

use crate::args::{Granularity, Mode};

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub spider: SpiderSection,
    pub embedding: EmbeddingSection,
    pub llm: LlmSection,
    pub paths: PathsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiderSection {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub c: Option<usize>,
    pub d: Option<usize>,
    pub mode: Option<Mode>,
    pub granularity: Option<Granularity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub batch_size: Option<usize>,
    pub max_input_chars: Option<usize>,
    pub concurrency: Option<usize>,
    pub max_retries: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub token_ceiling: Option<usize>,
    pub max_retries: Option<u32>,
    pub timeout_secs: Option<u64>,
    pub mock: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub graph: Option<PathBuf>,
    pub graphs: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub results: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| Error::Input(format!("invalid config {}: {e}", path.display())))
            .context("loading configuration")?;
        // relative paths in the file are relative to the file itself
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.paths.graph,
            &mut cfg.paths.graphs,
            &mut cfg.paths.cache,
            &mut cfg.paths.results,
            &mut cfg.paths.out,
            &mut cfg.llm.mock,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
