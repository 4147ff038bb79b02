use std::collections::BTreeSet;
use std::path::Path;

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use walkdir::WalkDir;

use super::extract::{self, FileSymbols};
use super::resolve::{resolve_edges, ParsedFile};
use super::{CodeEdge, CodeGraph, CodeNode, EdgeKind, Language, NodeId, NodeKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Glob patterns (matched against repo-relative paths) to leave out.
    pub ignore: Vec<String>,
    /// Parser threads; `None` uses all cores.
    pub jobs: Option<usize>,
}

/// A file or entity that was skipped during the build, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub graph: CodeGraph,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn build_graph(repo_root: &Path, language: Language) -> Result<BuildOutput> {
    build_graph_with(repo_root, language, &BuildOptions::default())
}

pub fn build_graph_with(
    repo_root: &Path,
    language: Language,
    options: &BuildOptions,
) -> Result<BuildOutput> {
    let meta = std::fs::metadata(repo_root)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", repo_root.display())))?;
    if !meta.is_dir() {
        return Err(Error::input(format!(
            "{} is not a directory",
            repo_root.display()
        )));
    }
    std::fs::read_dir(repo_root)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", repo_root.display())))?;
    let ignore = compile_ignore(&options.ignore)?;

    let mut diagnostics = Vec::new();
    let mut dirs = Vec::new();
    let mut sources = Vec::new();
    let walker = WalkDir::new(repo_root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|entry| entry.depth() == 0 || entry.file_name() != ".git");
    for entry in walker {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e.path().map(|p| relative(repo_root, p)).unwrap_or_default();
                diagnostics.push(Diagnostic {
                    path,
                    message: format!("unreadable: {e}"),
                });
                continue;
            }
        };
        let rel = relative(repo_root, entry.path());
        if entry.depth() > 0 && ignore.is_match(&rel) {
            continue;
        }
        let ft = entry.file_type();
        if ft.is_dir() {
            if entry.depth() == 0 || !ancestor_ignored(&ignore, &rel) {
                dirs.push(rel);
            }
        } else if ft.is_file()
            && entry.path().extension().and_then(|e| e.to_str()) == Some(language.extension())
            && !ancestor_ignored(&ignore, &rel)
        {
            sources.push(rel);
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .stack_size(16 << 20)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let parsed: Vec<(String, ParseOutcome)> = pool.install(|| {
        sources
            .par_iter()
            .map(|rel| (rel.clone(), parse_file(&repo_root.join(rel), rel, language)))
            .collect()
    });

    let mut nodes = Vec::new();
    let mut edges = BTreeSet::new();
    for dir in &dirs {
        nodes.push(CodeNode {
            id: NodeId::new(dir.clone()),
            kind: NodeKind::Directory,
            name: basename(dir).to_string(),
            path: dir.clone(),
            span: (0, 0),
            content: String::new(),
        });
        if !dir.is_empty() {
            edges.insert(CodeEdge::new(
                NodeId::new(parent_of(dir)),
                NodeId::new(dir.clone()),
                EdgeKind::Contains,
            ));
        }
    }

    let mut files = Vec::new();
    for (rel, result) in parsed {
        match result {
            Ok((text, symbols)) if !symbols.entities.is_empty() => {
                let file = add_file(
                    &rel,
                    text,
                    symbols,
                    &mut nodes,
                    &mut edges,
                    &mut diagnostics,
                );
                files.push(file);
            }
            Ok(_) => {}
            Err(message) => diagnostics.push(Diagnostic { path: rel, message }),
        }
    }
    edges.extend(resolve_edges(language, &files));

    let graph = CodeGraph::new(language, nodes, edges.into_iter().collect())?;
    Ok(BuildOutput { graph, diagnostics })
}

/// Source text and symbols, or why the file was skipped.
type ParseOutcome = std::result::Result<(String, FileSymbols), String>;

fn parse_file(abs: &Path, rel: &str, language: Language) -> ParseOutcome {
    let bytes = std::fs::read(abs).map_err(|e| format!("unreadable: {e}"))?;
    if bytes.contains(&0) {
        return Err("undecodable: binary content".to_string());
    }
    let text = String::from_utf8_lossy(&bytes).into_owned();
    let symbols = extract::parse_source(language, rel, &text)?;
    Ok((text, symbols))
}

fn add_file(
    rel: &str,
    text: String,
    symbols: FileSymbols,
    nodes: &mut Vec<CodeNode>,
    edges: &mut BTreeSet<CodeEdge>,
    diagnostics: &mut Vec<Diagnostic>,
) -> ParsedFile {
    let file_id = NodeId::new(rel);
    let lines = text.lines().count().max(1) as u32;
    nodes.push(CodeNode {
        id: file_id.clone(),
        kind: NodeKind::File,
        name: basename(rel).to_string(),
        path: rel.to_string(),
        span: (1, lines),
        content: text,
    });
    edges.insert(CodeEdge::new(
        NodeId::new(parent_of(rel)),
        file_id.clone(),
        EdgeKind::Contains,
    ));

    let mut seen = BTreeSet::new();
    let ids: Vec<Option<NodeId>> = symbols
        .entities
        .iter()
        .map(|e| {
            let id = NodeId::entity(rel, &e.qualified, e.span.0);
            if seen.insert(id.clone()) {
                Some(id)
            } else {
                diagnostics.push(Diagnostic {
                    path: rel.to_string(),
                    message: format!("duplicate entity `{id}` skipped"),
                });
                None
            }
        })
        .collect();

    for (entity, id) in symbols.entities.iter().zip(&ids) {
        let Some(id) = id else { continue };
        nodes.push(CodeNode {
            id: id.clone(),
            kind: entity.kind,
            name: entity.name.clone(),
            path: rel.to_string(),
            span: entity.span,
            content: entity.content.clone(),
        });
        let parent = entity
            .parent
            .and_then(|p| ids[p].clone())
            .unwrap_or_else(|| file_id.clone());
        edges.insert(CodeEdge::new(parent, id.clone(), EdgeKind::Contains));
    }

    ParsedFile {
        path: rel.to_string(),
        symbols,
        ids,
    }
}

fn compile_ignore(patterns: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        let glob =
            Glob::new(p).map_err(|e| Error::Config(format!("bad ignore glob `{p}`: {e}")))?;
        builder.add(glob);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("ignore globs: {e}")))
}

/// filter_entry cannot see the glob set cheaply, so descendants of an
/// ignored directory are rejected here.
fn ancestor_ignored(ignore: &GlobSet, rel: &str) -> bool {
    let mut cur = rel;
    while let Some((parent, _)) = cur.rsplit_once('/') {
        if ignore.is_match(parent) {
            return true;
        }
        cur = parent;
    }
    false
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn basename(rel: &str) -> &str {
    rel.rsplit('/').next().unwrap_or(rel)
}

fn parent_of(rel: &str) -> String {
    rel.rsplit_once('/')
        .map(|(p, _)| p.to_string())
        .unwrap_or_default()
}
