//! Per-file symbol extraction on top of tree-sitter syntax trees.
//!
//! Each language walker reports the classes and functions of one file, the
//! call sites inside each function, base-class names, and import statements.
//! Cross-file resolution happens later in `resolve`.

mod java;
mod js;
mod python;

use tree_sitter::{Node, Parser};

use super::{Language, NodeKind};

#[derive(Debug, Clone)]
pub(crate) struct RawEntity {
    pub kind: NodeKind,
    pub name: String,
    pub qualified: String,
    pub span: (u32, u32),
    pub content: String,
    /// Index of the containing class entity; `None` means the file.
    pub parent: Option<usize>,
    pub bases: Vec<String>,
    /// Target symbol of a `X.prototype.m = ...` assignment.
    pub prototype_of: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Receiver {
    /// Bare call: `f()`.
    None,
    /// `self.f()` / `this.f()` / implicit-this Java call.
    SelfRef,
    /// `obj.f()`.
    Other,
}

#[derive(Debug, Clone)]
pub(crate) struct RawCall {
    pub caller: usize,
    pub callee: String,
    pub receiver: Receiver,
}

#[derive(Debug, Clone)]
pub(crate) struct ImportedName {
    pub imported: String,
    pub local: String,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct RawImport {
    /// Language-specific module reference: dotted Python module (leading
    /// dots for relative imports), Java qualified name, or JS/TS specifier.
    pub module: String,
    pub names: Vec<ImportedName>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct FileSymbols {
    pub entities: Vec<RawEntity>,
    pub calls: Vec<RawCall>,
    pub imports: Vec<RawImport>,
}

pub(crate) fn parse_source(
    language: Language,
    path: &str,
    src: &str,
) -> Result<FileSymbols, String> {
    let grammar: tree_sitter::Language = match language {
        Language::Python => tree_sitter_python::LANGUAGE.into(),
        Language::Java => tree_sitter_java::LANGUAGE.into(),
        Language::JavaScript => tree_sitter_javascript::LANGUAGE.into(),
        Language::TypeScript => tree_sitter_typescript::LANGUAGE_TYPESCRIPT.into(),
    };
    let mut parser = Parser::new();
    parser
        .set_language(&grammar)
        .map_err(|e| format!("grammar load failed: {e}"))?;
    let tree = parser
        .parse(src, None)
        .ok_or_else(|| format!("{path}: parser returned no tree"))?;
    let root = tree.root_node();
    if root.has_error() {
        let line = first_error_line(root).unwrap_or(1);
        return Err(format!("{path}:{line}: syntax error"));
    }
    let mut walker = Walker::new(src);
    match language {
        Language::Python => python::walk(&mut walker, root),
        Language::Java => java::walk(&mut walker, root),
        Language::JavaScript | Language::TypeScript => js::walk(&mut walker, root),
    }
    let mut out = walker.out;
    if matches!(language, Language::JavaScript | Language::TypeScript) {
        js::attach_prototype_methods(&mut out);
    }
    Ok(out)
}

fn first_error_line(node: Node) -> Option<u32> {
    if node.is_error() || node.is_missing() {
        return Some(node.start_position().row as u32 + 1);
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        if child.has_error() {
            if let Some(line) = first_error_line(child) {
                return Some(line);
            }
        }
    }
    None
}

pub(crate) struct Walker<'s> {
    src: &'s str,
    pub out: FileSymbols,
    /// Enclosing named entities, innermost last.
    stack: Vec<usize>,
}

impl<'s> Walker<'s> {
    fn new(src: &'s str) -> Self {
        Walker {
            src,
            out: FileSymbols::default(),
            stack: Vec::new(),
        }
    }

    pub fn text(&self, node: Node) -> &'s str {
        self.src.get(node.byte_range()).unwrap_or("")
    }

    fn qualify(&self, name: &str) -> String {
        let mut parts: Vec<&str> = self
            .stack
            .iter()
            .map(|&i| self.out.entities[i].name.as_str())
            .collect();
        parts.push(name);
        parts.join(".")
    }

    fn innermost(&self, kind: NodeKind) -> Option<usize> {
        self.stack
            .iter()
            .rev()
            .copied()
            .find(|&i| self.out.entities[i].kind == kind)
    }

    /// Record a new entity spanning `node` and make it the innermost scope.
    /// `qualified_name` overrides the scope-derived qualified name.
    pub fn enter(
        &mut self,
        kind: NodeKind,
        name: &str,
        node: Node,
        bases: Vec<String>,
        qualified_name: Option<String>,
    ) -> usize {
        let qualified = qualified_name.unwrap_or_else(|| self.qualify(name));
        let entity = RawEntity {
            kind,
            name: name.to_string(),
            qualified,
            span: (
                node.start_position().row as u32 + 1,
                node.end_position().row as u32 + 1,
            ),
            content: self.text(node).to_string(),
            parent: self.innermost(NodeKind::Class),
            bases,
            prototype_of: None,
        };
        self.out.entities.push(entity);
        let idx = self.out.entities.len() - 1;
        self.stack.push(idx);
        idx
    }

    pub fn leave(&mut self) {
        self.stack.pop();
    }

    pub fn call(&mut self, callee: &str, receiver: Receiver) {
        let callee = callee.trim();
        if callee.is_empty() {
            return;
        }
        if let Some(caller) = self.innermost(NodeKind::Function) {
            self.out.calls.push(RawCall {
                caller,
                callee: callee.to_string(),
                receiver,
            });
        }
    }

    pub fn import(&mut self, import: RawImport) {
        self.out.imports.push(import);
    }

    pub fn children(&mut self, node: Node, visit: fn(&mut Self, Node)) {
        let mut cursor = node.walk();
        let kids: Vec<Node> = node.named_children(&mut cursor).collect();
        for child in kids {
            visit(self, child);
        }
    }
}

/// Last dotted segment of a (possibly generic or qualified) type reference.
pub(crate) fn last_segment(text: &str) -> String {
    let head = text.split('<').next().unwrap_or(text);
    head.rsplit(['.', ':'])
        .next()
        .unwrap_or(head)
        .trim()
        .to_string()
}
