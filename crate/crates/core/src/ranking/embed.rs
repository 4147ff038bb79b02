use std::collections::HashSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::cache::EmbeddingCache;
use super::{query_fingerprint, tokenize, RankedList};
use crate::code_graph::{CodeGraph, NodeId, NodeKind};
use crate::error::{Error, Result};
use crate::http::{JsonClient, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingProviderSpec {
    /// `http(s)://...` for a remote provider, `hash:<dim>` for the built-in
    /// offline feature-hashing embedder.
    pub endpoint: String,
    pub model_name: String,
    pub batch_size: usize,
    pub max_input_chars: usize,
    /// Batches in flight at once.
    pub concurrency: usize,
    pub max_retries: u32,
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for EmbeddingProviderSpec {
    fn default() -> Self {
        EmbeddingProviderSpec {
            endpoint: String::new(),
            model_name: "default".to_string(),
            batch_size: 32,
            max_input_chars: 8000,
            concurrency: 4,
            max_retries: 3,
            api_key: None,
        }
    }
}

impl EmbeddingProviderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("embedding batch_size must be >= 1".into()));
        }
        if self.max_input_chars == 0 {
            return Err(Error::Config(
                "embedding max_input_chars must be >= 1".into(),
            ));
        }
        if self.concurrency == 0 {
            return Err(Error::Config("embedding concurrency must be >= 1".into()));
        }
        if self.model_name.is_empty() {
            return Err(Error::Config("embedding model name is empty".into()));
        }
        Ok(())
    }
}

/// Text encoder. Returns one raw (not necessarily normalized) vector per
/// input, in input order.
pub trait Embedder: Send + Sync {
    fn embed(&self, inputs: &[String]) -> Result<Vec<Vec<f32>>>;
}

pub fn embedder_for(spec: &EmbeddingProviderSpec) -> Result<Box<dyn Embedder>> {
    spec.validate()?;
    let endpoint = spec.endpoint.trim();
    if let Some(dim) = endpoint.strip_prefix("hash:") {
        let dim: usize = dim
            .parse()
            .map_err(|_| Error::Config(format!("bad hash embedder dimension in `{endpoint}`")))?;
        return Ok(Box::new(HashEmbedder::new(dim)?));
    }
    if endpoint.starts_with("http://") || endpoint.starts_with("https://") {
        return Ok(Box::new(HttpEmbedder::new(spec)));
    }
    if endpoint.is_empty() {
        return Err(Error::Config("no embedding endpoint configured".into()));
    }
    Err(Error::Config(format!(
        "unsupported embedding endpoint `{endpoint}`"
    )))
}

/// OpenAI-style embeddings endpoint:
/// `{"model", "input": [..]}` → `{"data": [{"embedding": [..]}, ..]}`.
pub struct HttpEmbedder {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: JsonClient,
}

impl HttpEmbedder {
    pub fn new(spec: &EmbeddingProviderSpec) -> Self {
        let retry = RetryPolicy {
            max_retries: spec.max_retries,
            ..RetryPolicy::default()
        };
        HttpEmbedder {
            endpoint: spec.endpoint.clone(),
            model: spec.model_name.clone(),
            api_key: spec.api_key.clone(),
            client: JsonClient::new(retry, Duration::from_secs(120)),
        }
    }
}

impl Embedder for HttpEmbedder {
    fn embed(&self, inputs: &[String]) -> Result<Vec<Vec<f32>>> {
        let body = json!({ "model": self.model, "input": inputs });
        let reply = self
            .client
            .post(&self.endpoint, self.api_key.as_deref(), &body)?;
        parse_embedding_reply(&reply, inputs.len())
    }
}

fn parse_embedding_reply(reply: &Value, expected: usize) -> Result<Vec<Vec<f32>>> {
    let data = reply
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Provider("embedding reply has no `data` array".into()))?;
    let mut rows: Vec<(usize, Vec<f32>)> = Vec::with_capacity(data.len());
    for (pos, item) in data.iter().enumerate() {
        let index = item
            .get("index")
            .and_then(Value::as_u64)
            .map(|i| i as usize)
            .unwrap_or(pos);
        let vector = item
            .get("embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Provider(format!("embedding reply item {pos} has no vector")))?
            .iter()
            .map(|x| x.as_f64().map(|v| v as f32))
            .collect::<Option<Vec<f32>>>()
            .ok_or_else(|| Error::Provider(format!("embedding reply item {pos} is not numeric")))?;
        rows.push((index, vector));
    }
    rows.sort_by_key(|(i, _)| *i);
    if rows.len() != expected || rows.iter().enumerate().any(|(i, (idx, _))| i != *idx) {
        return Err(Error::Provider(format!(
            "embedding reply has {} vectors for {expected} inputs",
            rows.len()
        )));
    }
    Ok(rows.into_iter().map(|(_, v)| v).collect())
}

/// Deterministic offline embedder: signed feature hashing of the same
/// tokens BM25 uses. Useful for tests and for running without a provider.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("hash embedder dimension must be >= 1".into()));
        }
        Ok(HashEmbedder { dim })
    }

    fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f32; self.dim];
        for token in tokenize(text) {
            let digest = Sha256::digest(token.as_bytes());
            let h = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
            let slot = (h % self.dim as u64) as usize;
            v[slot] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        if v.iter().all(|x| *x == 0.0) {
            v[0] = 1.0;
        }
        v
    }
}

impl Embedder for HashEmbedder {
    fn embed(&self, inputs: &[String]) -> Result<Vec<Vec<f32>>> {
        Ok(inputs.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub id: NodeId,
    /// Unit-length vector.
    pub vector: Vec<f32>,
    /// Content was cut to `max_input_chars` before encoding.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    pub dim: usize,
    pub entries: Vec<IndexEntry>,
}

impl EmbeddingIndex {
    /// Normalizes and indexes raw vectors. All must share one dimension.
    pub fn from_vectors(vectors: Vec<(NodeId, Vec<f32>)>) -> Result<Self> {
        let mut dim = None;
        let mut entries = Vec::with_capacity(vectors.len());
        for (id, raw) in vectors {
            match dim {
                None => dim = Some(raw.len()),
                Some(d) if d != raw.len() => {
                    return Err(Error::Config(format!(
                        "vector for `{id}` has dim {}, expected {d}",
                        raw.len()
                    )))
                }
                Some(_) => {}
            }
            let vector = normalize(&raw)
                .ok_or_else(|| Error::Provider(format!("zero-norm embedding for `{id}`")))?;
            entries.push(IndexEntry {
                id,
                vector,
                truncated: false,
            });
        }
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(EmbeddingIndex {
            dim: dim.unwrap_or(0),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Cosine ranking against an already-encoded query vector.
    pub fn rank_vector(&self, query: &[f32], query_fingerprint: &str) -> Result<RankedList> {
        if self.is_empty() {
            return Err(Error::input("embedding index is empty"));
        }
        if query.len() != self.dim {
            return Err(Error::Config(format!(
                "query embedding has dim {}, index has {}",
                query.len(),
                self.dim
            )));
        }
        let q =
            normalize(query).ok_or_else(|| Error::Provider("zero-norm query embedding".into()))?;
        let scores = self
            .entries
            .iter()
            .map(|e| (e.id.clone(), dot(&q, &e.vector)))
            .collect();
        RankedList::from_scores(scores, query_fingerprint)
    }
}

fn normalize(v: &[f32]) -> Option<Vec<f32>> {
    let norm = v
        .iter()
        .map(|x| (*x as f64) * (*x as f64))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(v.iter().map(|x| (*x as f64 / norm) as f32).collect())
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum()
}

fn truncate_head(text: &str, max_chars: usize) -> (&str, bool) {
    match text.char_indices().nth(max_chars) {
        Some((byte, _)) => (&text[..byte], true),
        None => (text, false),
    }
}

fn content_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Encodes every node of `kind` (function or class), reusing cached vectors
/// and fetching the rest in `batch_size` batches.
pub fn embed_candidates(
    graph: &CodeGraph,
    kind: NodeKind,
    embedder: &dyn Embedder,
    spec: &EmbeddingProviderSpec,
    cache: &mut EmbeddingCache,
) -> Result<EmbeddingIndex> {
    spec.validate()?;
    if !matches!(kind, NodeKind::Function | NodeKind::Class) {
        return Err(Error::input(format!(
            "cannot embed {kind} nodes; use function or class"
        )));
    }
    let model = spec.model_name.as_str();

    struct Prepared<'a> {
        id: &'a NodeId,
        key: String,
        truncated: bool,
    }
    let mut prepared = Vec::new();
    let mut pending: Vec<(String, String)> = Vec::new();
    let mut queued = HashSet::new();
    for node in graph.nodes_of_kind(kind) {
        let (text, truncated) = truncate_head(&node.content, spec.max_input_chars);
        let key = content_key(text);
        if cache.get(model, &key).is_none() && queued.insert(key.clone()) {
            pending.push((key.clone(), text.to_string()));
        }
        prepared.push(Prepared {
            id: &node.id,
            key,
            truncated,
        });
    }

    let batches: Vec<&[(String, String)]> = pending.chunks(spec.batch_size).collect();
    for wave in batches.chunks(spec.concurrency) {
        let results: Vec<Result<Vec<Vec<f32>>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = wave
                .iter()
                .map(|batch| {
                    scope.spawn(move || {
                        let texts: Vec<String> = batch.iter().map(|(_, t)| t.clone()).collect();
                        let vectors = embedder.embed(&texts)?;
                        if vectors.len() != texts.len() {
                            return Err(Error::Provider(format!(
                                "provider returned {} vectors for {} inputs",
                                vectors.len(),
                                texts.len()
                            )));
                        }
                        Ok(vectors)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join().unwrap_or_else(|_| {
                        Err(Error::Provider("embedding worker panicked".into()))
                    })
                })
                .collect()
        });
        for (batch, result) in wave.iter().zip(results) {
            match result {
                Ok(vectors) => {
                    for ((key, _), vector) in batch.iter().zip(vectors) {
                        cache.insert(model, key, vector)?;
                    }
                }
                Err(e) => log::warn!("embedding batch of {} failed: {e}", batch.len()),
            }
        }
    }
    cache.flush()?;

    let mut vectors = Vec::with_capacity(prepared.len());
    let mut missing = Vec::new();
    let mut truncated = HashSet::new();
    for p in prepared {
        match cache.get(model, &p.key) {
            Some(v) => {
                if p.truncated {
                    truncated.insert(p.id.clone());
                }
                vectors.push((p.id.clone(), v.to_vec()));
            }
            None => missing.push(p.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::PartialIndex { missing });
    }
    let mut index = EmbeddingIndex::from_vectors(vectors)?;
    for entry in &mut index.entries {
        entry.truncated = truncated.contains(&entry.id);
    }
    Ok(index)
}

/// Encodes the query (head-truncated like documents) and ranks every
/// indexed node by cosine similarity.
pub fn rank_dense(
    index: &EmbeddingIndex,
    query: &str,
    embedder: &dyn Embedder,
    spec: &EmbeddingProviderSpec,
) -> Result<RankedList> {
    if index.is_empty() {
        return Err(Error::input("embedding index is empty"));
    }
    let (text, truncated) = truncate_head(query, spec.max_input_chars);
    if truncated {
        log::warn!(
            "query truncated to {} characters before encoding",
            spec.max_input_chars
        );
    }
    let mut vectors = embedder.embed(&[text.to_string()])?;
    let q = vectors
        .pop()
        .filter(|_| vectors.is_empty())
        .ok_or_else(|| Error::Provider("query embedding missing".into()))?;
    index.rank_vector(&q, &query_fingerprint(query))
}
