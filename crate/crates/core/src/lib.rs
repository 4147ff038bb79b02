//! Graph-aware code localization.
//!
//! The crate turns a repository checkout into a heterogeneous code graph,
//! ranks its functions (or classes) against an issue description with dense
//! or lexical similarity, refines the top of that ranking by exploring
//! containment neighborhoods and filtering them with an LLM, and scores the
//! result against ground truth derived from a gold patch.

pub mod code_graph;
pub mod error;
pub mod evaluation;
mod http;
pub mod llm_filter;
pub mod ranking;
pub mod spider;

pub use code_graph::{CodeEdge, CodeGraph, CodeNode, EdgeKind, Language, NodeId, NodeKind};
pub use error::{Error, Result};
