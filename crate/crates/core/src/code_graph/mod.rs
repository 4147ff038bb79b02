//! Heterogeneous code graph: directories, files, classes and functions
//! connected by typed edges.

mod bfs;
mod build;
mod extract;
mod resolve;
mod serialize;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bfs::{bfs_function_neighbors, bfs_neighbors};
pub use build::{build_graph, build_graph_with, BuildOptions, BuildOutput, Diagnostic};
pub use serialize::{load_graph, serialize_graph};

/// Stable node identity: `<path>::<qualified.name>@<line>` for classes and
/// functions, the bare repo-relative path for files and directories.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    /// `<path>::<qualified>@<line>`, the id of a class or function.
    pub fn entity(path: &str, qualified: &str, line: u32) -> Self {
        NodeId(format!("{path}::{qualified}@{line}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Directory,
    File,
    Class,
    Function,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Directory => "directory",
            NodeKind::File => "file",
            NodeKind::Class => "class",
            NodeKind::Function => "function",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "directory" => Ok(NodeKind::Directory),
            "file" => Ok(NodeKind::File),
            "class" => Ok(NodeKind::Class),
            "function" => Ok(NodeKind::Function),
            other => Err(Error::input(format!("unknown node kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Contains,
    Imports,
    Invokes,
    Inherits,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Contains => "contains",
            EdgeKind::Imports => "imports",
            EdgeKind::Invokes => "invokes",
            EdgeKind::Inherits => "inherits",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "contains" => Ok(EdgeKind::Contains),
            "imports" => Ok(EdgeKind::Imports),
            "invokes" => Ok(EdgeKind::Invokes),
            "inherits" => Ok(EdgeKind::Inherits),
            other => Err(Error::input(format!("unknown edge kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[serde(alias = "py")]
    Python,
    Java,
    #[serde(alias = "js")]
    JavaScript,
    #[serde(alias = "ts")]
    TypeScript,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
            Language::JavaScript => "javascript",
            Language::TypeScript => "typescript",
        }
    }

    /// Source-file extension (without the dot) that belongs to this language.
    pub fn extension(self) -> &'static str {
        match self {
            Language::Python => "py",
            Language::Java => "java",
            Language::JavaScript => "js",
            Language::TypeScript => "ts",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "java" => Ok(Language::Java),
            "javascript" | "js" => Ok(Language::JavaScript),
            "typescript" | "ts" => Ok(Language::TypeScript),
            other => Err(Error::input(format!("unsupported language `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub name: String,
    /// Repo-relative path; empty only for the root directory.
    pub path: String,
    /// 1-based inclusive line range, `(0, 0)` for directories.
    pub span: (u32, u32),
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodeEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
}

impl CodeEdge {
    pub fn new(src: NodeId, dst: NodeId, kind: EdgeKind) -> Self {
        CodeEdge { src, dst, kind }
    }
}

/// Immutable code graph. Nodes are kept sorted by id and edges by
/// `(src, dst, kind)`, so two graphs with the same content compare equal and
/// serialize identically.
#[derive(Debug, Clone)]
pub struct CodeGraph {
    language: Language,
    nodes: Vec<CodeNode>,
    edges: Vec<CodeEdge>,
    index: HashMap<NodeId, usize>,
    /// Undirected adjacency: for each node, `(neighbor, edge kind)` sorted.
    adjacency: Vec<Vec<(usize, EdgeKind)>>,
}

impl PartialEq for CodeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.language == other.language && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for CodeGraph {}

fn contains_allowed(src: NodeKind, dst: NodeKind) -> bool {
    use NodeKind::*;
    matches!(
        (src, dst),
        (Directory, Directory | File) | (File, Class | Function) | (Class, Function | Class)
    )
}

impl CodeGraph {
    /// Assemble and validate a graph. Duplicate edges are collapsed.
    pub fn new(language: Language, mut nodes: Vec<CodeNode>, edges: Vec<CodeEdge>) -> Result<Self> {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate node id `{}`", node.id)));
            }
            match node.kind {
                NodeKind::Directory => {}
                NodeKind::File | NodeKind::Class | NodeKind::Function => {
                    if node.span.0 > node.span.1 {
                        return Err(Error::input(format!(
                            "node `{}` has an inverted span",
                            node.id
                        )));
                    }
                    if node.kind != NodeKind::File && node.content.is_empty() {
                        return Err(Error::input(format!("node `{}` has no content", node.id)));
                    }
                }
            }
        }

        let edges: Vec<CodeEdge> = edges
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for edge in &edges {
            let (Some(&s), Some(&d)) = (index.get(&edge.src), index.get(&edge.dst)) else {
                return Err(Error::input(format!(
                    "edge {} -> {} references an unknown node",
                    edge.src, edge.dst
                )));
            };
            if s == d {
                return Err(Error::input(format!("self-loop on `{}`", edge.src)));
            }
            if edge.kind == EdgeKind::Contains && !contains_allowed(nodes[s].kind, nodes[d].kind) {
                return Err(Error::input(format!(
                    "contains edge {} ({}) -> {} ({}) is not allowed",
                    edge.src, nodes[s].kind, edge.dst, nodes[d].kind
                )));
            }
            adjacency[s].push((d, edge.kind));
            adjacency[d].push((s, edge.kind));
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }

        let graph = CodeGraph {
            language,
            nodes,
            edges,
            index,
            adjacency,
        };
        graph.check_containment()?;
        Ok(graph)
    }

    fn check_containment(&self) -> Result<()> {
        let Some(root) = self.root_index() else {
            return Err(Error::input("graph has no root directory node"));
        };
        let mut seen = vec![false; self.nodes.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for edge in self.edges.iter().filter(|e| e.kind == EdgeKind::Contains) {
            children[self.index[&edge.src]].push(self.index[&edge.dst]);
        }
        while let Some(v) = queue.pop_front() {
            for &c in &children[v] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::input(format!(
                "node `{}` is not reachable from the root via contains edges",
                self.nodes[i].id
            )));
        }
        Ok(())
    }

    fn root_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.kind == NodeKind::Directory && n.path.is_empty())
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn root(&self) -> &CodeNode {
        &self.nodes[self.root_index().expect("validated at construction")]
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> &[CodeNode] {
        &self.nodes
    }

    /// Edges in `(src, dst, kind)` order.
    pub fn edges(&self) -> &[CodeEdge] {
        &self.edges
    }

    pub fn node(&self, id: &NodeId) -> Option<&CodeNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &CodeNode> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    /// Class/function nodes declared in the file at `path`.
    pub fn entities_in_file<'a>(&'a self, path: &'a str) -> impl Iterator<Item = &'a CodeNode> {
        self.nodes.iter().filter(move |n| {
            n.path == path && matches!(n.kind, NodeKind::Class | NodeKind::Function)
        })
    }

    pub fn node_counts(&self) -> BTreeMap<NodeKind, usize> {
        let mut counts = BTreeMap::new();
        for n in &self.nodes {
            *counts.entry(n.kind).or_insert(0) += 1;
        }
        counts
    }

    pub fn edge_counts(&self) -> BTreeMap<EdgeKind, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.edges {
            *counts.entry(e.kind).or_insert(0) += 1;
        }
        counts
    }

    pub(crate) fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn node_at(&self, i: usize) -> &CodeNode {
        &self.nodes[i]
    }

    pub(crate) fn adjacent(&self, i: usize) -> &[(usize, EdgeKind)] {
        &self.adjacency[i]
    }
}
