use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::TokenUsage;
use crate::error::{Error, Result};
use crate::http::{JsonClient, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
    /// Keys a scripted provider may answer by (request fingerprint, then
    /// center id). Not sent over the wire.
    pub lookup_keys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatReply {
    pub content: String,
    pub usage: Option<TokenUsage>,
}

pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatReply>;
}

impl<T: ChatProvider + ?Sized> ChatProvider for Box<T> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatReply> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmProviderSpec {
    pub endpoint: String,
    pub model: String,
    pub max_retries: u32,
    pub timeout_secs: u64,
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for LlmProviderSpec {
    fn default() -> Self {
        LlmProviderSpec {
            endpoint: String::new(),
            model: String::new(),
            max_retries: 3,
            timeout_secs: 120,
            api_key: None,
        }
    }
}

/// OpenAI-style chat completions endpoint.
pub struct HttpChat {
    endpoint: String,
    api_key: Option<String>,
    client: JsonClient,
}

impl HttpChat {
    pub fn new(spec: &LlmProviderSpec) -> Result<Self> {
        if !(spec.endpoint.starts_with("http://") || spec.endpoint.starts_with("https://")) {
            return Err(Error::Config(format!(
                "LLM endpoint `{}` is not an http(s) URL",
                spec.endpoint
            )));
        }
        if spec.model.is_empty() {
            return Err(Error::Config("LLM model name is not set".into()));
        }
        let retry = RetryPolicy {
            max_retries: spec.max_retries,
            ..RetryPolicy::default()
        };
        Ok(HttpChat {
            endpoint: spec.endpoint.clone(),
            api_key: spec.api_key.clone(),
            client: JsonClient::new(retry, Duration::from_secs(spec.timeout_secs.max(1))),
        })
    }
}

impl ChatProvider for HttpChat {
    fn complete(&self, request: &ChatRequest) -> Result<ChatReply> {
        let body = json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": request.messages,
        });
        let reply = self
            .client
            .post(&self.endpoint, self.api_key.as_deref(), &body)?;
        parse_chat_reply(&reply)
    }
}

fn parse_chat_reply(reply: &Value) -> Result<ChatReply> {
    let content = reply
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Provider("chat reply has no choices[0].message.content".into()))?
        .to_string();
    let usage = reply.get("usage").map(|u| TokenUsage {
        input: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        output: u
            .get("completion_tokens")
            .and_then(Value::as_u64)
            .unwrap_or(0),
    });
    Ok(ChatReply { content, usage })
}

/// Offline provider answering from a fixed script.
///
/// Script file (JSON): `{"default": "[]", "replies": {"<key>": "<reply>"}}`
/// where a key is a filter-request fingerprint or a center node id. The
/// first matching lookup key wins; otherwise `default` is used, and with no
/// default the call fails like an unreachable provider would.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptedChat {
    #[serde(default)]
    pub default: Option<String>,
    #[serde(default)]
    pub replies: BTreeMap<String, String>,
}

impl ScriptedChat {
    pub fn new(default: Option<String>, replies: BTreeMap<String, String>) -> Self {
        ScriptedChat { default, replies }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!(
                "cannot read LLM mock script {}: {e}",
                path.display()
            ))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid LLM mock script {}: {e}", path.display())))
    }
}

impl ChatProvider for ScriptedChat {
    fn complete(&self, request: &ChatRequest) -> Result<ChatReply> {
        let content = request
            .lookup_keys
            .iter()
            .find_map(|k| self.replies.get(k))
            .or(self.default.as_ref())
            .cloned()
            .ok_or_else(|| Error::Provider("mock script has no reply for this request".into()))?;
        Ok(ChatReply {
            content,
            usage: None,
        })
    }
}
