//! Center selection, neighborhood expansion and final-list assembly.

mod assemble;

use std::collections::{HashMap, HashSet};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code_graph::{bfs_neighbors, CodeGraph, EdgeKind, NodeId, NodeKind};
use crate::error::{Error, Result};
use crate::llm_filter::{FilterNeighbor, FilterRequest, NeighborFilter};
use crate::ranking::{top, RankedList};

pub use assemble::assemble_final;

fn default_edge_kinds() -> Vec<EdgeKind> {
    vec![EdgeKind::Contains]
}

fn is_default_edge_kinds(kinds: &Vec<EdgeKind>) -> bool {
    *kinds == default_edge_kinds()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiderConfig {
    pub k: usize,
    pub n: usize,
    pub c: usize,
    pub d: usize,
    /// Edge kinds walked during expansion.
    #[serde(
        default = "default_edge_kinds",
        skip_serializing_if = "is_default_edge_kinds"
    )]
    pub edge_kinds: Vec<EdgeKind>,
}

impl Default for SpiderConfig {
    fn default() -> Self {
        SpiderConfig {
            k: 20,
            n: 500,
            c: 5,
            d: 4,
            edge_kinds: default_edge_kinds(),
        }
    }
}

impl SpiderConfig {
    pub fn new(k: usize, n: usize, c: usize, d: usize) -> Result<Self> {
        let config = SpiderConfig {
            k,
            n,
            c,
            d,
            edge_kinds: default_edge_kinds(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::input("K must be positive"));
        }
        if self.n <= self.k {
            return Err(Error::input(format!(
                "N ({}) must exceed K ({})",
                self.n, self.k
            )));
        }
        if self.c == 0 || self.c > self.k {
            return Err(Error::input(format!(
                "C ({}) must be in 1..=K ({})",
                self.c, self.k
            )));
        }
        if self.edge_kinds.is_empty() {
            return Err(Error::input("at least one expansion edge kind is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: NodeId,
    pub hops: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterExpansion {
    pub center: NodeId,
    pub candidates: Vec<Candidate>,
    pub selected: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A center that received at least one inserted neighbor.
    Center,
    LlmNeighbor(NodeId),
    Retained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalEntry {
    pub id: NodeId,
    pub score: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderResult {
    pub query_fingerprint: String,
    pub config: SpiderConfig,
    #[serde(rename = "final")]
    pub final_list: Vec<FinalEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<CenterExpansion>,
}

impl SpiderResult {
    /// Plain top-K result (no graph stage), every entry `retained`.
    pub fn from_ranking(ranked: &RankedList, config: &SpiderConfig) -> Self {
        let final_list = ranked
            .entries()
            .iter()
            .take(config.k)
            .map(|e| FinalEntry {
                id: e.node_id.clone(),
                score: e.score,
                provenance: Provenance::Retained,
            })
            .collect();
        SpiderResult {
            query_fingerprint: ranked.query_fingerprint().to_string(),
            config: config.clone(),
            final_list,
            trace: Vec::new(),
        }
    }

    pub fn ids(&self) -> Vec<NodeId> {
        self.final_list.iter().map(|e| e.id.clone()).collect()
    }
}

/// The first `c` entries of the top-K list.
pub fn select_centers(ranked_topk: &RankedList, c: usize) -> Result<Vec<NodeId>> {
    if c > ranked_topk.len() {
        return Err(Error::input(format!(
            "cannot pick {c} centers from a ranking of {}",
            ranked_topk.len()
        )));
    }
    Ok(ranked_topk.ids().take(c).cloned().collect())
}

/// Neighbors of `center` within `config.d` hops that are also in the top-N
/// slice of `ranked_full`, excluding every center. Ordered by descending
/// score, ties by id.
pub fn expand_center(
    graph: &CodeGraph,
    center: &NodeId,
    centers: &[NodeId],
    config: &SpiderConfig,
    ranked_full: &RankedList,
) -> Result<CenterExpansion> {
    let top_n: HashMap<&NodeId, f64> = ranked_full
        .entries()
        .iter()
        .take(config.n)
        .map(|e| (&e.node_id, e.score))
        .collect();
    expand_with(graph, center, centers, config, &top_n)
}

fn expand_with(
    graph: &CodeGraph,
    center: &NodeId,
    centers: &[NodeId],
    config: &SpiderConfig,
    top_n: &HashMap<&NodeId, f64>,
) -> Result<CenterExpansion> {
    let excluded: HashSet<&NodeId> = centers.iter().chain(std::iter::once(center)).collect();
    let mut candidates: Vec<Candidate> = bfs_neighbors(
        graph,
        center,
        config.d,
        NodeKind::Function,
        &config.edge_kinds,
    )?
    .into_iter()
    .filter(|(id, _)| !excluded.contains(id))
    .filter_map(|(id, hops)| top_n.get(&id).map(|&score| Candidate { id, hops, score }))
    .collect();
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
    Ok(CenterExpansion {
        center: center.clone(),
        candidates,
        selected: Vec::new(),
        notes: Vec::new(),
    })
}

pub fn run_spider(
    graph: &CodeGraph,
    ranked_full: &RankedList,
    issue_text: &str,
    config: &SpiderConfig,
    filter: &dyn NeighborFilter,
) -> Result<SpiderResult> {
    run_spider_with(graph, ranked_full, issue_text, config, filter, 1)
}

/// As [`run_spider`], issuing up to `concurrency` filter calls at once. The
/// result does not depend on completion order.
pub fn run_spider_with(
    graph: &CodeGraph,
    ranked_full: &RankedList,
    issue_text: &str,
    config: &SpiderConfig,
    filter: &dyn NeighborFilter,
    concurrency: usize,
) -> Result<SpiderResult> {
    config.validate()?;
    if ranked_full.is_empty() {
        return Ok(SpiderResult::from_ranking(ranked_full, config));
    }
    let topk = top(ranked_full, config.k)?;
    let centers = select_centers(&topk, config.c.min(topk.len()))?;
    let top_n: HashMap<&NodeId, f64> = ranked_full
        .entries()
        .iter()
        .take(config.n)
        .map(|e| (&e.node_id, e.score))
        .collect();

    let expansions = centers
        .iter()
        .map(|center| expand_with(graph, center, &centers, config, &top_n))
        .collect::<Result<Vec<_>>>()?;

    let run = |mut exp: CenterExpansion| -> CenterExpansion {
        if exp.candidates.is_empty() {
            return exp;
        }
        match filter_expansion(graph, issue_text, &exp, filter) {
            Ok((selected, notes)) => {
                exp.selected = selected;
                exp.notes = notes;
            }
            Err(e) => {
                warn!("neighbor filter failed for center {}: {e}", exp.center);
                exp.notes.push(format!("filter failed: {e}"));
            }
        }
        exp
    };
    let expansions: Vec<CenterExpansion> = if concurrency > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(concurrency)
            .build()
            .map_err(|e| Error::Config(format!("cannot start filter workers: {e}")))?;
        pool.install(|| expansions.into_par_iter().map(run).collect())
    } else {
        expansions.into_iter().map(run).collect()
    };

    let final_list = assemble_final(&topk, &centers, &expansions, config.k);
    Ok(SpiderResult {
        query_fingerprint: ranked_full.query_fingerprint().to_string(),
        config: config.clone(),
        final_list,
        trace: expansions,
    })
}

fn filter_expansion(
    graph: &CodeGraph,
    issue_text: &str,
    exp: &CenterExpansion,
    filter: &dyn NeighborFilter,
) -> Result<(Vec<NodeId>, Vec<String>)> {
    let content = |id: &NodeId| {
        graph
            .node(id)
            .map(|n| n.content.clone())
            .unwrap_or_default()
    };
    let neighbors = exp
        .candidates
        .iter()
        .map(|c| FilterNeighbor {
            id: c.id.clone(),
            content: content(&c.id),
            hops: c.hops,
            score: c.score,
        })
        .collect();
    let request = FilterRequest::new(
        issue_text,
        exp.center.clone(),
        content(&exp.center),
        neighbors,
    )?;
    let response = filter.filter(&request)?;
    let known: HashSet<&NodeId> = exp.candidates.iter().map(|c| &c.id).collect();
    let mut notes = response.diagnostics;
    let mut selected = Vec::new();
    for id in response.selected {
        if !known.contains(&id) {
            notes.push(format!("ignored non-candidate `{id}`"));
        } else if !selected.contains(&id) {
            selected.push(id);
        }
    }
    Ok((selected, notes))
}
