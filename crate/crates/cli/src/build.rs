use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use spider_core::code_graph::{build_graph_with, load_graph, serialize_graph, BuildOptions};
use spider_core::ranking::{embed_candidates, embedder_for, EmbeddingCache};
use spider_core::{CodeGraph, EdgeKind, Error, NodeKind};

use crate::args::{BuildGraphArgs, Granularity, IndexArgs};
use crate::config::FileConfig;
use crate::retrieve::embedding_spec;

const NODE_KINDS: [NodeKind; 4] = [
    NodeKind::Directory,
    NodeKind::File,
    NodeKind::Class,
    NodeKind::Function,
];
const EDGE_KINDS: [EdgeKind; 4] = [
    EdgeKind::Contains,
    EdgeKind::Imports,
    EdgeKind::Invokes,
    EdgeKind::Inherits,
];

pub fn build_graph(
    args: &BuildGraphArgs,
    cfg: &FileConfig,
    jobs: Option<usize>,
) -> anyhow::Result<()> {
    let out = args
        .out
        .clone()
        .or_else(|| cfg.paths.graph.clone())
        .ok_or_else(|| Error::Input("no output path: pass --out or set [paths].graph".into()))?;
    let options = BuildOptions {
        ignore: args.ignore.clone(),
        jobs,
    };
    let built = build_graph_with(&args.repo, args.language.into(), &options)?;
    for d in &built.diagnostics {
        eprintln!("skipped {}: {}", d.path, d.message);
    }
    write_graph(&built.graph, &out)?;
    print_counts(&built.graph);
    Ok(())
}

pub fn write_graph(graph: &CodeGraph, out: &Path) -> anyhow::Result<()> {
    let file = File::create(out)
        .map_err(|e| Error::Input(format!("cannot create {}: {e}", out.display())))?;
    let mut w = BufWriter::new(file);
    serialize_graph(graph, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_graph(path: &Path) -> anyhow::Result<CodeGraph> {
    let file = File::open(path)
        .map_err(|e| Error::Input(format!("cannot open graph {}: {e}", path.display())))?;
    load_graph(BufReader::new(file)).with_context(|| format!("loading graph {}", path.display()))
}

fn print_counts(graph: &CodeGraph) {
    let nodes = graph.node_counts();
    let edges = graph.edge_counts();
    let line = |parts: Vec<String>| parts.join(" ");
    println!(
        "nodes {}",
        line(
            NODE_KINDS
                .iter()
                .map(|k| format!("{k}={}", nodes.get(k).copied().unwrap_or(0)))
                .collect()
        )
    );
    println!(
        "edges {}",
        line(
            EDGE_KINDS
                .iter()
                .map(|k| format!("{k}={}", edges.get(k).copied().unwrap_or(0)))
                .collect()
        )
    );
}

pub fn graph_path(flag: &Option<PathBuf>, cfg: &FileConfig) -> anyhow::Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.paths.graph.clone())
        .ok_or_else(|| {
            Error::Input("no graph given: pass --graph or set [paths].graph".into()).into()
        })
}

pub fn open_cache(flag: &Option<PathBuf>, cfg: &FileConfig) -> anyhow::Result<EmbeddingCache> {
    Ok(match flag.clone().or_else(|| cfg.paths.cache.clone()) {
        Some(path) => EmbeddingCache::open(path)?,
        None => EmbeddingCache::in_memory(),
    })
}

pub fn index(args: &IndexArgs, cfg: &FileConfig, jobs: Option<usize>) -> anyhow::Result<()> {
    let spec = embedding_spec(&args.embedding, cfg, jobs)?;
    let embedder = embedder_for(&spec)?;
    let graph = read_graph(&graph_path(&args.graph, cfg)?)?;
    let mut cache = open_cache(&args.embedding.cache, cfg)?;
    let kind = args
        .granularity
        .or(cfg.spider.granularity)
        .unwrap_or(Granularity::Function)
        .kind();
    let index = embed_candidates(&graph, kind, embedder.as_ref(), &spec, &mut cache)?;
    cache.flush()?;
    println!(
        "indexed {} {kind} nodes (dim {}), cache holds {} vectors",
        index.len(),
        index.dim,
        cache.len()
    );
    Ok(())
}
