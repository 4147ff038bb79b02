use std::collections::VecDeque;

use super::{CodeGraph, EdgeKind, NodeId, NodeKind};
use crate::error::{Error, Result};

/// Function nodes within `depth` undirected `contains` hops of `center`,
/// with their minimal hop distance. Sorted by distance, then id.
pub fn bfs_function_neighbors(
    graph: &CodeGraph,
    center: &NodeId,
    depth: usize,
) -> Result<Vec<(NodeId, usize)>> {
    bfs_neighbors(
        graph,
        center,
        depth,
        NodeKind::Function,
        &[EdgeKind::Contains],
    )
}

/// Generalized neighborhood query: nodes of `target` kind reachable from
/// `center` within `depth` hops over the given edge kinds (treated as
/// undirected). The center itself must be of `target` kind and is excluded.
pub fn bfs_neighbors(
    graph: &CodeGraph,
    center: &NodeId,
    depth: usize,
    target: NodeKind,
    edge_kinds: &[EdgeKind],
) -> Result<Vec<(NodeId, usize)>> {
    let start = graph
        .index_of(center)
        .ok_or_else(|| Error::input(format!("unknown center node `{center}`")))?;
    let center_kind = graph.node_at(start).kind;
    if center_kind != target {
        return Err(Error::input(format!(
            "center `{center}` is a {center_kind} node, expected {target}"
        )));
    }

    let mut dist: Vec<Option<usize>> = vec![None; graph.nodes().len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    let mut found = Vec::new();
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or_default();
        if d == depth {
            continue;
        }
        for &(w, kind) in graph.adjacent(v) {
            if dist[w].is_some() || !edge_kinds.contains(&kind) {
                continue;
            }
            dist[w] = Some(d + 1);
            queue.push_back(w);
            if graph.node_at(w).kind == target {
                found.push((graph.node_at(w).id.clone(), d + 1));
            }
        }
    }
    found.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(found)
}
