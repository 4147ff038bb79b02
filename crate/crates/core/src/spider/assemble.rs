use std::collections::{HashMap, HashSet};

use super::{CenterExpansion, FinalEntry, Provenance};
use crate::code_graph::NodeId;
use crate::ranking::RankedList;

/// Merges filter selections into the top-K list without exceeding `k`.
///
/// Each selected neighbor is owned by the best-ranked center that chose it
/// and is emitted right after that center (descending score). If centers plus
/// neighbors exceed `k`, the lowest-scoring neighbors go. The remaining
/// budget is filled with the best non-center top-K entries not already
/// placed, kept at their original relative positions.
pub fn assemble_final(
    ranked_topk: &RankedList,
    centers: &[NodeId],
    expansions: &[CenterExpansion],
    k: usize,
) -> Vec<FinalEntry> {
    let center_set: HashSet<&NodeId> = centers.iter().collect();
    let topk_score: HashMap<&NodeId, f64> = ranked_topk
        .entries()
        .iter()
        .map(|e| (&e.node_id, e.score))
        .collect();

    // neighbor -> (owner center, score), first (best-ranked) center wins
    let mut owned: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let mut seen: HashSet<&NodeId> = HashSet::new();
    for center in centers {
        let Some(exp) = expansions.iter().find(|e| &e.center == center) else {
            continue;
        };
        let scores: HashMap<&NodeId, f64> =
            exp.candidates.iter().map(|c| (&c.id, c.score)).collect();
        for id in &exp.selected {
            if center_set.contains(id) || !seen.insert(id) {
                continue;
            }
            let score = scores
                .get(id)
                .or_else(|| topk_score.get(id))
                .copied()
                .unwrap_or(f64::NEG_INFINITY);
            owned.push((id.clone(), center.clone(), score));
        }
    }
    owned.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    owned.truncate(k.saturating_sub(centers.len()));

    let placed: HashSet<&NodeId> = owned.iter().map(|(id, _, _)| id).collect();
    let retain_budget = k.saturating_sub(centers.len() + owned.len());
    let retained: HashSet<&NodeId> = ranked_topk
        .ids()
        .filter(|id| !center_set.contains(id) && !placed.contains(id))
        .take(retain_budget)
        .collect();

    let mut out = Vec::with_capacity(k);
    for entry in ranked_topk.entries() {
        let id = &entry.node_id;
        if center_set.contains(id) {
            let mine: Vec<&(NodeId, NodeId, f64)> =
                owned.iter().filter(|(_, c, _)| c == id).collect();
            out.push(FinalEntry {
                id: id.clone(),
                score: entry.score,
                provenance: if mine.is_empty() {
                    Provenance::Retained
                } else {
                    Provenance::Center
                },
            });
            for (nid, _, score) in mine {
                out.push(FinalEntry {
                    id: nid.clone(),
                    score: *score,
                    provenance: Provenance::LlmNeighbor(id.clone()),
                });
            }
        } else if retained.contains(id) {
            out.push(FinalEntry {
                id: id.clone(),
                score: entry.score,
                provenance: Provenance::Retained,
            });
        }
    }
    out
}
