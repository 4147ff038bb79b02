//! Second-stage neighbor filter: one chat-completion call per center asks
//! the model which candidate neighbors are relevant to the issue.

mod chat;
mod prompt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::code_graph::NodeId;
use crate::error::{Error, Result};

pub use chat::{
    ChatMessage, ChatProvider, ChatReply, ChatRequest, HttpChat, LlmProviderSpec, ScriptedChat,
};
pub use prompt::{parse_reply, render_prompt, ParsedReply, SYSTEM_PROMPT};

pub const DEFAULT_TEMPERATURE: f64 = 0.1;
/// Per-call token budget (prompt plus expected reply).
pub const DEFAULT_TOKEN_CEILING: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterNeighbor {
    pub id: NodeId,
    pub content: String,
    pub hops: usize,
    /// Similarity score, used to decide what to trim first.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRequest {
    pub issue_text: String,
    pub center_id: NodeId,
    pub center_content: String,
    pub neighbors: Vec<FilterNeighbor>,
    pub temperature: f64,
}

impl FilterRequest {
    pub fn new(
        issue_text: impl Into<String>,
        center_id: NodeId,
        center_content: impl Into<String>,
        neighbors: Vec<FilterNeighbor>,
    ) -> Result<Self> {
        if neighbors.is_empty() {
            return Err(Error::input(format!(
                "filter request for `{center_id}` has no neighbors"
            )));
        }
        Ok(FilterRequest {
            issue_text: issue_text.into(),
            center_id,
            center_content: center_content.into(),
            neighbors,
            temperature: DEFAULT_TEMPERATURE,
        })
    }

    /// Hex SHA-256 over the issue, the center id and the neighbor ids.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.issue_text.as_bytes());
        h.update([0]);
        h.update(self.center_id.as_str().as_bytes());
        for n in &self.neighbors {
            h.update([0]);
            h.update(n.id.as_str().as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.neighbors.iter().any(|n| n.id.as_str() == id)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input: u64,
    pub output: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterResponse {
    /// Always a subset of the request's neighbor ids, in request order.
    pub selected: Vec<NodeId>,
    pub raw: String,
    pub usage: TokenUsage,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trimmed: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// Anything that can pick relevant neighbors for a center.
pub trait NeighborFilter: Send + Sync {
    fn filter(&self, request: &FilterRequest) -> Result<FilterResponse>;
}

/// Selects nothing. Running the full pipeline with it reproduces plain
/// similarity ranking.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptyFilter;

impl NeighborFilter for EmptyFilter {
    fn filter(&self, _request: &FilterRequest) -> Result<FilterResponse> {
        Ok(FilterResponse::default())
    }
}

/// Character-based `(input, output)` token estimate (chars / 4, rounded up).
/// Input covers the rendered prompt; output assumes every neighbor id is
/// returned.
pub fn estimate_tokens(request: &FilterRequest) -> (usize, usize) {
    let (system, user) = render_prompt(request);
    let input_chars = system.chars().count() + user.chars().count();
    let ids: Vec<&str> = request.neighbors.iter().map(|n| n.id.as_str()).collect();
    let output_chars = serde_json::to_string(&ids)
        .map(|s| s.chars().count())
        .unwrap_or(0);
    (input_chars.div_ceil(4), output_chars.div_ceil(4))
}

/// Drops lowest-similarity neighbors until the estimate fits `ceiling`.
/// The issue text and center are never removed, so the result may still
/// exceed the ceiling with zero neighbors left.
pub fn trim_to_budget(request: &FilterRequest, ceiling: usize) -> (FilterRequest, Vec<NodeId>) {
    let mut trimmed = request.clone();
    let mut removed = Vec::new();
    loop {
        let (input, output) = estimate_tokens(&trimmed);
        if input + output <= ceiling || trimmed.neighbors.is_empty() {
            break;
        }
        let worst = trimmed
            .neighbors
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.score.total_cmp(&b.score).then_with(|| b.id.cmp(&a.id)))
            .map(|(i, _)| i)
            .expect("non-empty");
        removed.push(trimmed.neighbors.remove(worst).id);
    }
    (trimmed, removed)
}

#[derive(Debug, Clone)]
pub struct FilterSettings {
    pub model: String,
    pub temperature: f64,
    pub token_ceiling: usize,
}

impl Default for FilterSettings {
    fn default() -> Self {
        FilterSettings {
            model: String::new(),
            temperature: DEFAULT_TEMPERATURE,
            token_ceiling: DEFAULT_TOKEN_CEILING,
        }
    }
}

/// Trim, render, call the provider once, then parse and validate the reply.
/// Ids the model invents are dropped; an unparseable reply yields an empty
/// selection with a diagnostic.
pub fn filter_neighbors(
    request: &FilterRequest,
    provider: &dyn ChatProvider,
    settings: &FilterSettings,
) -> Result<FilterResponse> {
    let (request, trimmed) = trim_to_budget(request, settings.token_ceiling);
    let mut diagnostics = Vec::new();
    if !trimmed.is_empty() {
        diagnostics.push(format!(
            "trimmed {} neighbor(s) to fit {} tokens",
            trimmed.len(),
            settings.token_ceiling
        ));
    }
    if request.neighbors.is_empty() {
        diagnostics.push("no neighbors fit the token ceiling; call skipped".to_string());
        return Ok(FilterResponse {
            trimmed,
            diagnostics,
            ..FilterResponse::default()
        });
    }

    let (system, user) = render_prompt(&request);
    let chat = ChatRequest {
        model: settings.model.clone(),
        temperature: settings.temperature,
        messages: vec![ChatMessage::system(system), ChatMessage::user(user)],
        lookup_keys: vec![request.fingerprint(), request.center_id.to_string()],
    };
    let reply = provider.complete(&chat)?;
    let parsed = parse_reply(&reply.content, &request);
    diagnostics.extend(parsed.diagnostics);
    let usage = reply.usage.unwrap_or_else(|| {
        let (input, _) = estimate_tokens(&request);
        TokenUsage {
            input: input as u64,
            output: reply.content.chars().count().div_ceil(4) as u64,
        }
    });
    Ok(FilterResponse {
        selected: parsed.selected,
        raw: reply.content,
        usage,
        trimmed,
        diagnostics,
    })
}

/// [`NeighborFilter`] backed by a chat provider.
pub struct LlmFilter<P> {
    provider: P,
    settings: FilterSettings,
}

impl<P: ChatProvider> LlmFilter<P> {
    pub fn new(provider: P, settings: FilterSettings) -> Self {
        LlmFilter { provider, settings }
    }
}

impl<P: ChatProvider> NeighborFilter for LlmFilter<P> {
    fn filter(&self, request: &FilterRequest) -> Result<FilterResponse> {
        filter_neighbors(request, &self.provider, &self.settings)
    }
}
