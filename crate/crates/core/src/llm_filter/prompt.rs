use std::collections::HashSet;
use std::fmt::Write as _;

use serde_json::Value;

use super::FilterRequest;
use crate::code_graph::NodeId;

pub const SYSTEM_PROMPT: &str = "You help localize the code that must change to resolve a software issue. \
You are given the issue, one function already judged relevant (the center), and candidate functions \
located near it in the codebase. Select only the candidates that are likely to need modification to \
resolve the issue. Be selective: return a candidate only if you believe it must be edited.";

/// Renders `(system, user)` messages. Candidates keep request order and are
/// introduced as `### <node-id> (hops=<h>)` followed by a fenced code block.
pub fn render_prompt(request: &FilterRequest) -> (String, String) {
    let mut user = String::new();
    let _ = writeln!(user, "## Issue\n{}\n", request.issue_text.trim_end());
    let _ = writeln!(user, "## Center: {}", request.center_id);
    push_code(&mut user, &request.center_content);
    let _ = writeln!(user, "\n## Candidate neighbors");
    for n in &request.neighbors {
        let _ = writeln!(user, "### {} (hops={})", n.id, n.hops);
        push_code(&mut user, &n.content);
    }
    let _ = write!(
        user,
        "\nRespond with ONLY a JSON array of the selected candidate ids, for example [\"<node-id>\", \"<node-id>\"]. \
Respond with [] if no candidate is relevant."
    );
    (SYSTEM_PROMPT.to_string(), user)
}

/// Fenced block whose fence is longer than any backtick run in `code`.
fn push_code(out: &mut String, code: &str) {
    let longest = code.split(|c| c != '`').map(str::len).max().unwrap_or(0);
    let fence = "`".repeat(longest.max(2) + 1);
    let _ = writeln!(out, "{fence}\n{}\n{fence}", code.trim_end_matches('\n'));
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedReply {
    pub selected: Vec<NodeId>,
    pub diagnostics: Vec<String>,
}

/// Extracts selected ids from a model reply. The first JSON array of
/// strings wins; failing that, lines that are exactly a candidate id (after
/// stripping list markers and quotes) are taken. Ids outside the request
/// are dropped and reported.
pub fn parse_reply(reply: &str, request: &FilterRequest) -> ParsedReply {
    let mut out = ParsedReply::default();
    let raw_ids = match first_string_array(reply) {
        Some(ids) => ids,
        None => {
            let ids = line_scan(reply, request);
            if ids.is_empty() {
                out.diagnostics
                    .push("reply contained no JSON id list; nothing selected".to_string());
            }
            ids
        }
    };

    let wanted: HashSet<&str> = raw_ids.iter().map(String::as_str).collect();
    for id in &raw_ids {
        if !request.contains(id) {
            out.diagnostics.push(format!("dropped unknown id `{id}`"));
        }
    }
    out.selected = request
        .neighbors
        .iter()
        .filter(|n| wanted.contains(n.id.as_str()))
        .map(|n| n.id.clone())
        .collect();
    out
}

fn first_string_array(reply: &str) -> Option<Vec<String>> {
    for (pos, _) in reply.match_indices('[') {
        let mut stream = serde_json::Deserializer::from_str(&reply[pos..]).into_iter::<Value>();
        if let Some(Ok(Value::Array(items))) = stream.next() {
            let strings: Vec<String> = items
                .iter()
                .filter_map(|v| v.as_str().map(|s| s.trim().to_string()))
                .collect();
            if items.is_empty() || !strings.is_empty() {
                return Some(strings);
            }
        }
    }
    None
}

fn line_scan(reply: &str, request: &FilterRequest) -> Vec<String> {
    reply
        .lines()
        .map(|line| {
            line.trim()
                .trim_start_matches(|c: char| {
                    c == '-' || c == '*' || c.is_ascii_digit() || c == '.' || c == ')'
                })
                .trim()
                .trim_matches(|c| c == '`' || c == '"' || c == '\'' || c == ',')
                .trim()
        })
        .filter(|candidate| request.contains(candidate))
        .map(str::to_string)
        .collect()
}
