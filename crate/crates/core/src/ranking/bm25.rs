//! Okapi BM25 over lower-cased alphanumeric tokens.
//!
//! score(D, Q) = Σ_{t ∈ Q} idf(t) · tf(t,D)·(k1+1) / (tf(t,D) + k1·(1 − b + b·|D|/avgdl))
//! idf(t)      = ln(1 + (N − n(t) + 0.5) / (n(t) + 0.5))
//!
//! Query terms are de-duplicated before summing.

use std::collections::{BTreeSet, HashMap};

use super::{query_fingerprint, RankedList};
use crate::code_graph::{CodeGraph, NodeId, NodeKind};
use crate::error::{Error, Result};

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

/// Splits on anything that is not alphanumeric and lower-cases.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub struct Bm25 {
    ids: Vec<NodeId>,
    term_freqs: Vec<HashMap<String, u32>>,
    lengths: Vec<usize>,
    doc_freq: HashMap<String, u32>,
    avg_len: f64,
}

impl Bm25 {
    pub fn new<'a>(docs: impl IntoIterator<Item = (NodeId, &'a str)>) -> Self {
        let mut ids = Vec::new();
        let mut term_freqs = Vec::new();
        let mut lengths = Vec::new();
        let mut doc_freq: HashMap<String, u32> = HashMap::new();
        for (id, text) in docs {
            let tokens = tokenize(text);
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_insert(0) += 1;
            }
            for t in tf.keys() {
                *doc_freq.entry(t.clone()).or_insert(0) += 1;
            }
            ids.push(id);
            lengths.push(tokens.len());
            term_freqs.push(tf);
        }
        let avg_len = if lengths.is_empty() {
            0.0
        } else {
            lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
        };
        Bm25 {
            ids,
            term_freqs,
            lengths,
            doc_freq,
            avg_len,
        }
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.ids.len() as f64;
        let df = self.doc_freq.get(term).copied().unwrap_or(0) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Scores every document, in insertion order.
    pub fn score(&self, query: &str) -> Vec<(NodeId, f64)> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let idfs: Vec<(&String, f64)> = terms.iter().map(|t| (t, self.idf(t))).collect();
        self.ids
            .iter()
            .enumerate()
            .map(|(d, id)| {
                let len_ratio = if self.avg_len > 0.0 {
                    self.lengths[d] as f64 / self.avg_len
                } else {
                    1.0
                };
                let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * len_ratio);
                let score = idfs
                    .iter()
                    .map(|(t, idf)| {
                        let tf = self.term_freqs[d].get(*t).copied().unwrap_or(0) as f64;
                        if tf == 0.0 {
                            0.0
                        } else {
                            idf * tf * (BM25_K1 + 1.0) / (tf + norm)
                        }
                    })
                    .sum();
                (id.clone(), score)
            })
            .collect()
    }
}

/// BM25 ranking of every node of `kind` by its source content.
pub fn rank_lexical(graph: &CodeGraph, kind: NodeKind, query: &str) -> Result<RankedList> {
    let docs: Vec<(NodeId, &str)> = graph
        .nodes_of_kind(kind)
        .map(|n| (n.id.clone(), n.content.as_str()))
        .collect();
    if docs.is_empty() {
        return Err(Error::input(format!("graph has no {kind} nodes to rank")));
    }
    let index = Bm25::new(docs);
    RankedList::from_scores(index.score(query), query_fingerprint(query))
}
