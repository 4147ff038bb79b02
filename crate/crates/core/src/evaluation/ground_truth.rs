use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::diff::{parse_unified_diff, touched_lines};
use crate::code_graph::{CodeGraph, EdgeKind, NodeId, NodeKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub node_ids: BTreeSet<NodeId>,
    pub granularity: NodeKind,
    /// Set when the patch touches no node of the requested kind.
    pub excluded: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// Nodes of kind `granularity` whose span overlaps a pre-image line touched
/// by `patch`. At class granularity a class also counts when one of the
/// methods it contains is touched (methods attached from outside the class
/// body, e.g. JS prototype assignments, lie outside its span).
pub fn extract_ground_truth(
    patch: &str,
    graph: &CodeGraph,
    granularity: NodeKind,
) -> Result<GroundTruth> {
    if !matches!(granularity, NodeKind::Function | NodeKind::Class) {
        return Err(Error::input(format!(
            "ground truth granularity must be function or class, got {granularity}"
        )));
    }
    let mut touched: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for file in parse_unified_diff(patch)? {
        let Some(path) = file.old_path.clone() else {
            continue; // created by the patch: nothing pre-existing to localize
        };
        if file.is_rename() {
            diagnostics.push(format!(
                "renamed {path} -> {}; scored against the old path",
                file.new_path.as_deref().unwrap_or("")
            ));
        }
        if file.hunks.is_empty() {
            continue;
        }
        if graph.entities_in_file(&path).next().is_none() {
            diagnostics.push(format!("{path}: not in the code graph, hunks ignored"));
            continue;
        }
        let lines = touched.entry(path).or_default();
        for hunk in &file.hunks {
            lines.extend(touched_lines(hunk));
        }
    }

    let hit = |path: &str, span: (u32, u32)| {
        touched
            .get(path)
            .is_some_and(|lines| lines.range(span.0..=span.1).next().is_some())
    };
    let touched_functions: BTreeSet<&NodeId> = touched
        .keys()
        .flat_map(|path| graph.entities_in_file(path))
        .filter(|n| n.kind == NodeKind::Function && hit(&n.path, n.span))
        .map(|n| &n.id)
        .collect();

    let node_ids: BTreeSet<NodeId> = match granularity {
        NodeKind::Function => touched_functions.into_iter().cloned().collect(),
        _ => {
            let mut classes: BTreeSet<NodeId> = touched
                .keys()
                .flat_map(|path| graph.entities_in_file(path))
                .filter(|n| n.kind == NodeKind::Class && hit(&n.path, n.span))
                .map(|n| n.id.clone())
                .collect();
            for edge in graph.edges() {
                if edge.kind == EdgeKind::Contains
                    && touched_functions.contains(&edge.dst)
                    && graph
                        .node(&edge.src)
                        .is_some_and(|n| n.kind == NodeKind::Class)
                {
                    classes.insert(edge.src.clone());
                }
            }
            classes
        }
    };
    Ok(GroundTruth {
        excluded: node_ids.is_empty(),
        node_ids,
        granularity,
        diagnostics,
    })
}
