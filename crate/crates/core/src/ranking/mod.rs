//! Similarity rankings of candidate nodes against an issue description.

mod bm25;
mod cache;
mod embed;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::code_graph::NodeId;
use crate::error::{Error, Result};

pub use bm25::{rank_lexical, tokenize, Bm25, BM25_B, BM25_K1};
pub use cache::EmbeddingCache;
pub use embed::{
    embed_candidates, embedder_for, rank_dense, Embedder, EmbeddingIndex, EmbeddingProviderSpec,
    HashEmbedder, HttpEmbedder, IndexEntry,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    #[serde(rename = "id")]
    pub node_id: NodeId,
    pub score: f64,
}

/// Nodes ordered by descending score, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    entries: Vec<RankedEntry>,
    query_fingerprint: String,
}

impl RankedList {
    /// Sorts `scores` into ranking order. NaN scores rank last.
    pub fn from_scores(
        scores: Vec<(NodeId, f64)>,
        query_fingerprint: impl Into<String>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(scores.len());
        let mut entries = Vec::with_capacity(scores.len());
        for (node_id, score) in scores {
            if !seen.insert(node_id.clone()) {
                return Err(Error::input(format!("node `{node_id}` ranked twice")));
            }
            let score = if score.is_nan() {
                f64::NEG_INFINITY
            } else {
                score
            };
            entries.push(RankedEntry { node_id, score });
        }
        entries.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.node_id.cmp(&b.node_id))
        });
        Ok(RankedList {
            entries,
            query_fingerprint: query_fingerprint.into(),
        })
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = &NodeId> {
        self.entries.iter().map(|e| &e.node_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn query_fingerprint(&self) -> &str {
        &self.query_fingerprint
    }

    /// First `min(m, len)` entries; `m` is clamped to at least zero.
    pub fn prefix(&self, m: usize) -> RankedList {
        RankedList {
            entries: self.entries.iter().take(m).cloned().collect(),
            query_fingerprint: self.query_fingerprint.clone(),
        }
    }
}

/// Top-`m` slice of a ranking. `m` must be positive.
pub fn top(ranked: &RankedList, m: usize) -> Result<RankedList> {
    if m == 0 {
        return Err(Error::input("top-m requires m >= 1"));
    }
    Ok(ranked.prefix(m))
}

/// Hex SHA-256 of the query text.
pub fn query_fingerprint(query: &str) -> String {
    hex::encode(Sha256::digest(query.as_bytes()))
}

/// Query text for an issue: title and body separated by one blank line.
pub fn issue_query(title: &str, body: &str) -> String {
    match (title.trim().is_empty(), body.trim().is_empty()) {
        (true, _) => body.to_string(),
        (false, true) => title.to_string(),
        (false, false) => format!("{title}\n\n{body}"),
    }
}
