use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;
use spider_core::evaluation::{load_instances, LocalizationInstance};
use spider_core::llm_filter::{
    FilterSettings, HttpChat, LlmFilter, LlmProviderSpec, NeighborFilter, ScriptedChat,
};
use spider_core::ranking::{
    embed_candidates, embedder_for, query_fingerprint, rank_dense, rank_lexical, Embedder,
    EmbeddingCache, EmbeddingProviderSpec, RankedList,
};
use spider_core::spider::{run_spider_with, SpiderConfig, SpiderResult};
use spider_core::{CodeGraph, Error, NodeKind};

use crate::args::{EmbeddingArgs, Granularity, LlmArgs, Mode, RetrieveArgs, SpiderArgs};
use crate::build::{graph_path, open_cache, read_graph};
use crate::config::FileConfig;

pub fn spider_config(args: &SpiderArgs, cfg: &FileConfig) -> anyhow::Result<SpiderConfig> {
    let d = SpiderConfig::default();
    let s = &cfg.spider;
    Ok(SpiderConfig::new(
        args.k.or(s.k).unwrap_or(d.k),
        args.n.or(s.n).unwrap_or(d.n),
        args.c.or(s.c).unwrap_or(d.c),
        args.d.or(s.d).unwrap_or(d.d),
    )?)
}

pub fn embedding_spec(
    args: &EmbeddingArgs,
    cfg: &FileConfig,
    jobs: Option<usize>,
) -> anyhow::Result<EmbeddingProviderSpec> {
    let e = &cfg.embedding;
    let d = EmbeddingProviderSpec::default();
    let endpoint = args
        .embed_endpoint
        .clone()
        .or_else(|| e.endpoint.clone())
        .ok_or_else(|| {
            Error::Config("no embedding endpoint: pass --embed-endpoint, set SPIDER_EMBED_ENDPOINT or [embedding].endpoint".into())
        })?;
    let spec = EmbeddingProviderSpec {
        endpoint,
        model_name: args
            .embed_model
            .clone()
            .or_else(|| e.model.clone())
            .unwrap_or(d.model_name),
        batch_size: e.batch_size.unwrap_or(d.batch_size),
        max_input_chars: e.max_input_chars.unwrap_or(d.max_input_chars),
        concurrency: e.concurrency.or(jobs).unwrap_or(d.concurrency),
        max_retries: e.max_retries.unwrap_or(d.max_retries),
        api_key: std::env::var("SPIDER_EMBED_API_KEY")
            .ok()
            .filter(|k| !k.is_empty()),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn make_filter(args: &LlmArgs, cfg: &FileConfig) -> anyhow::Result<Box<dyn NeighborFilter>> {
    let l = &cfg.llm;
    let defaults = FilterSettings::default();
    let mut settings = FilterSettings {
        model: String::new(),
        temperature: args
            .temperature
            .or(l.temperature)
            .unwrap_or(defaults.temperature),
        token_ceiling: args
            .token_ceiling
            .or(l.token_ceiling)
            .unwrap_or(defaults.token_ceiling),
    };
    if let Some(mock) = args.llm_mock.clone().or_else(|| l.mock.clone()) {
        settings.model = "mock".into();
        return Ok(Box::new(LlmFilter::new(
            ScriptedChat::load(mock)?,
            settings,
        )));
    }
    let endpoint = args.llm_endpoint.clone().or_else(|| l.endpoint.clone()).ok_or_else(|| {
        Error::Config("no LLM configured: pass --llm-endpoint/--llm-model (or SPIDER_LLM_*), or --llm-mock".into())
    })?;
    let spec = LlmProviderSpec {
        endpoint,
        model: args
            .llm_model
            .clone()
            .or_else(|| l.model.clone())
            .unwrap_or_default(),
        max_retries: l.max_retries.unwrap_or(3),
        timeout_secs: l.timeout_secs.unwrap_or(120),
        api_key: std::env::var("SPIDER_LLM_API_KEY")
            .ok()
            .filter(|k| !k.is_empty()),
    };
    settings.model = spec.model.clone();
    Ok(Box::new(LlmFilter::new(HttpChat::new(&spec)?, settings)))
}

/// Everything a retrieval needs besides the graph and the issue.
pub struct Retriever {
    pub kind: NodeKind,
    pub config: SpiderConfig,
    pub trace: bool,
    pub concurrency: usize,
    embedding: Option<(Box<dyn Embedder>, EmbeddingProviderSpec, EmbeddingCache)>,
    filter: Option<Box<dyn NeighborFilter>>,
}

impl Retriever {
    /// Resolves and validates all settings, including providers, before any
    /// input is read or any request is made.
    pub fn new(args: &RetrieveArgs, cfg: &FileConfig, jobs: Option<usize>) -> anyhow::Result<Self> {
        let mode = args.mode.or(cfg.spider.mode).unwrap_or(Mode::Spider);
        let granularity = args
            .granularity
            .or(cfg.spider.granularity)
            .unwrap_or(Granularity::Function);
        if mode.explores() && granularity != Granularity::Function {
            return Err(Error::Input(
                "graph exploration works on functions; use --granularity function".into(),
            )
            .into());
        }
        let config = spider_config(&args.spider, cfg)?;
        let embedding = if mode.dense() {
            let spec = embedding_spec(&args.embedding, cfg, jobs)?;
            let embedder = embedder_for(&spec)?;
            Some((embedder, spec, open_cache(&args.embedding.cache, cfg)?))
        } else {
            None
        };
        let filter = if mode.explores() {
            Some(make_filter(&args.llm, cfg)?)
        } else {
            None
        };
        Ok(Retriever {
            kind: granularity.kind(),
            concurrency: jobs.unwrap_or(config.c).clamp(1, config.c),
            config,
            trace: args.trace,
            embedding,
            filter,
        })
    }

    pub fn rank(&mut self, graph: &CodeGraph, issue: &str) -> anyhow::Result<RankedList> {
        if graph.nodes_of_kind(self.kind).next().is_none() {
            return Ok(RankedList::from_scores(
                Vec::new(),
                query_fingerprint(issue),
            )?);
        }
        Ok(match &mut self.embedding {
            Some((embedder, spec, cache)) => {
                let index = embed_candidates(graph, self.kind, embedder.as_ref(), spec, cache)?;
                cache.flush()?;
                rank_dense(&index, issue, embedder.as_ref(), spec)?
            }
            None => rank_lexical(graph, self.kind, issue)?,
        })
    }

    pub fn retrieve(&mut self, graph: &CodeGraph, issue: &str) -> anyhow::Result<SpiderResult> {
        let ranked = self.rank(graph, issue)?;
        let Some(filter) = &self.filter else {
            return Ok(SpiderResult::from_ranking(&ranked, &self.config));
        };
        let mut result = run_spider_with(
            graph,
            &ranked,
            issue,
            &self.config,
            filter.as_ref(),
            self.concurrency,
        )?;
        if !self.trace {
            result.trace.clear();
        }
        Ok(result)
    }
}

pub fn result_json(result: &SpiderResult) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(result)? + "\n")
}

fn read_issue(path: &Path) -> anyhow::Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read issue {}: {e}", path.display())))?;
    }
    if text.trim().is_empty() {
        return Err(Error::Input("issue text is empty".into()).into());
    }
    Ok(text)
}

/// File name used for an instance's graph/result files.
pub fn instance_file(id: &str, ext: &str) -> String {
    format!("{}.{ext}", id.replace(['/', '\\'], "__"))
}

pub fn read_instances(path: &Path) -> anyhow::Result<Vec<LocalizationInstance>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Input(format!("cannot open instances {}: {e}", path.display())))?;
    load_instances(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))
}

/// Prebuilt `<graphs>/<id>.ndjson` if present, otherwise a fresh build of
/// the instance's checkout (relative to the dataset file).
pub fn instance_graph(
    inst: &LocalizationInstance,
    graphs: Option<&Path>,
    dataset: &Path,
    jobs: Option<usize>,
) -> anyhow::Result<CodeGraph> {
    if let Some(dir) = graphs {
        let path = dir.join(instance_file(&inst.instance_id, "ndjson"));
        if path.exists() {
            return read_graph(&path);
        }
    }
    let repo = PathBuf::from(&inst.repo_ref);
    let repo = if repo.is_relative() {
        dataset.parent().unwrap_or(Path::new(".")).join(repo)
    } else {
        repo
    };
    let options = spider_core::code_graph::BuildOptions {
        jobs,
        ..Default::default()
    };
    let built = spider_core::code_graph::build_graph_with(&repo, inst.language, &options)
        .with_context(|| format!("building graph for {}", inst.instance_id))?;
    for d in &built.diagnostics {
        log::warn!("{}: skipped {}: {}", inst.instance_id, d.path, d.message);
    }
    Ok(built.graph)
}

pub fn run(args: &RetrieveArgs, cfg: &FileConfig, jobs: Option<usize>) -> anyhow::Result<()> {
    let mut retriever = Retriever::new(args, cfg, jobs)?;

    if let Some(dataset) = &args.instances {
        let out_dir = args
            .results
            .clone()
            .or_else(|| cfg.paths.results.clone())
            .ok_or_else(|| {
                Error::Input("no results directory: pass --results or set [paths].results".into())
            })?;
        let graphs = args.graphs.clone().or_else(|| cfg.paths.graphs.clone());
        let instances = read_instances(dataset)?;
        std::fs::create_dir_all(&out_dir)
            .map_err(|e| Error::Input(format!("cannot create {}: {e}", out_dir.display())))?;
        for inst in &instances {
            let graph = instance_graph(inst, graphs.as_deref(), dataset, jobs)?;
            let result = retriever.retrieve(&graph, &inst.issue_text)?;
            let path = out_dir.join(instance_file(&inst.instance_id, "json"));
            std::fs::write(&path, result_json(&result)?)?;
            info!("{}: {} entries", inst.instance_id, result.final_list.len());
        }
        println!("wrote {} results to {}", instances.len(), out_dir.display());
        return Ok(());
    }

    let issue_path = args
        .issue
        .as_ref()
        .ok_or_else(|| Error::Input("pass --issue FILE (or --instances for a dataset)".into()))?;
    let graph = read_graph(&graph_path(&args.graph, cfg)?)?;
    let issue = read_issue(issue_path)?;
    let json = result_json(&retriever.retrieve(&graph, &issue)?)?;
    match &args.out {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    Ok(())
}
