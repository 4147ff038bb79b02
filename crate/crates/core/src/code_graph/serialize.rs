//! Newline-delimited JSON graph format.
//!
//! ```text
//! {"t":"meta","format":1,"language":"python"}
//! {"t":"node","id":"pkg/a.py","kind":"file","name":"a.py","path":"pkg/a.py","span":[1,12],"content":"..."}
//! {"t":"edge","src":"pkg","dst":"pkg/a.py","kind":"contains"}
//! ```
//!
//! Nodes come before edges, each group sorted, and every record ends with a
//! newline; a missing final newline is treated as truncation.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CodeEdge, CodeGraph, CodeNode, EdgeKind, Language, NodeId, NodeKind};
use crate::error::{Error, Result};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
enum Record {
    Meta {
        format: u32,
        language: Language,
    },
    Node {
        id: NodeId,
        kind: NodeKind,
        name: String,
        path: String,
        span: [u32; 2],
        content: String,
    },
    Edge {
        src: NodeId,
        dst: NodeId,
        kind: EdgeKind,
    },
}

/// Writes `graph` to `sink`, returning the number of bytes written.
pub fn serialize_graph(graph: &CodeGraph, mut sink: impl Write) -> Result<u64> {
    let mut written = 0u64;
    let mut emit = |record: &Record| -> Result<()> {
        let mut line = serde_json::to_string(record).map_err(|e| Error::Io(e.into()))?;
        line.push('\n');
        sink.write_all(line.as_bytes())?;
        written += line.len() as u64;
        Ok(())
    };
    emit(&Record::Meta {
        format: FORMAT_VERSION,
        language: graph.language(),
    })?;
    for n in graph.nodes() {
        emit(&Record::Node {
            id: n.id.clone(),
            kind: n.kind,
            name: n.name.clone(),
            path: n.path.clone(),
            span: [n.span.0, n.span.1],
            content: n.content.clone(),
        })?;
    }
    for e in graph.edges() {
        emit(&Record::Edge {
            src: e.src.clone(),
            dst: e.dst.clone(),
            kind: e.kind,
        })?;
    }
    sink.flush()?;
    Ok(written)
}

pub fn load_graph(mut source: impl BufRead) -> Result<CodeGraph> {
    let mut language = None;
    let mut nodes: Vec<CodeNode> = Vec::new();
    let mut kinds: HashMap<NodeId, NodeKind> = HashMap::new();
    let mut edges = Vec::new();
    let mut record = 0usize;
    let mut line = String::new();
    loop {
        line.clear();
        if source.read_line(&mut line)? == 0 {
            break;
        }
        record += 1;
        if !line.ends_with('\n') {
            return Err(Error::format(
                record,
                "truncated record (no trailing newline)",
            ));
        }
        let text = line.trim_end_matches(['\n', '\r']);
        let parsed: Record = serde_json::from_str(text)
            .map_err(|e| Error::format(record, format!("invalid record: {e}")))?;
        match parsed {
            Record::Meta {
                format,
                language: lang,
            } => {
                if record != 1 {
                    return Err(Error::format(record, "meta record must come first"));
                }
                if format != FORMAT_VERSION {
                    return Err(Error::format(
                        record,
                        format!("unsupported format version {format}"),
                    ));
                }
                language = Some(lang);
            }
            _ if language.is_none() => return Err(Error::format(record, "missing meta header")),
            Record::Node {
                id,
                kind,
                name,
                path,
                span,
                content,
            } => {
                if !edges.is_empty() {
                    return Err(Error::format(record, "node record after edge records"));
                }
                if kinds.insert(id.clone(), kind).is_some() {
                    return Err(Error::format(record, format!("duplicate node id `{id}`")));
                }
                nodes.push(CodeNode {
                    id,
                    kind,
                    name,
                    path,
                    span: (span[0], span[1]),
                    content,
                });
            }
            Record::Edge { src, dst, kind } => {
                for end in [&src, &dst] {
                    if !kinds.contains_key(end) {
                        return Err(Error::format(
                            record,
                            format!("edge references unknown node `{end}`"),
                        ));
                    }
                }
                if src == dst {
                    return Err(Error::format(record, format!("self-loop on `{src}`")));
                }
                edges.push(CodeEdge { src, dst, kind });
            }
        }
    }
    let Some(language) = language else {
        return Err(Error::format(1, "empty stream: missing meta header"));
    };
    CodeGraph::new(language, nodes, edges).map_err(|e| Error::format(record, e.to_string()))
}
