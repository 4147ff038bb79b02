//! Best-effort name resolution for `imports`, `invokes` and `inherits`
//! edges. A reference resolves through the file's own symbols first and the
//! file's import map second; anything ambiguous or unknown yields no edge.

use std::collections::{BTreeSet, HashMap};

use super::extract::{FileSymbols, Receiver};
use super::{CodeEdge, EdgeKind, Language, NodeId, NodeKind};

pub(crate) struct ParsedFile {
    pub path: String,
    pub symbols: FileSymbols,
    /// Node id of each entity; `None` for entities dropped as duplicates.
    pub ids: Vec<Option<NodeId>>,
}

type EntityRef = (usize, usize);

pub(crate) fn resolve_edges(language: Language, files: &[ParsedFile]) -> BTreeSet<CodeEdge> {
    let resolver = Resolver::new(language, files);
    let mut edges = BTreeSet::new();
    for (f, file) in files.iter().enumerate() {
        let imports = resolver.imports(f, &mut edges);
        for call in &file.symbols.calls {
            if let Some(target) =
                resolver.call_target(f, call.caller, &call.callee, call.receiver, &imports)
            {
                resolver.push(&mut edges, (f, call.caller), target, EdgeKind::Invokes);
            }
        }
        for (e, entity) in file.symbols.entities.iter().enumerate() {
            if entity.kind != NodeKind::Class {
                continue;
            }
            for base in &entity.bases {
                if let Some(target) = resolver.class_target(f, base, &imports) {
                    resolver.push(&mut edges, (f, e), target, EdgeKind::Inherits);
                }
            }
        }
    }
    edges
}

struct Resolver<'a> {
    language: Language,
    files: &'a [ParsedFile],
    by_path: HashMap<&'a str, usize>,
}

impl<'a> Resolver<'a> {
    fn new(language: Language, files: &'a [ParsedFile]) -> Self {
        let by_path = files
            .iter()
            .enumerate()
            .map(|(i, f)| (f.path.as_str(), i))
            .collect();
        Resolver {
            language,
            files,
            by_path,
        }
    }

    fn id(&self, (f, e): EntityRef) -> Option<&NodeId> {
        self.files[f].ids.get(e).and_then(Option::as_ref)
    }

    fn push(&self, edges: &mut BTreeSet<CodeEdge>, src: EntityRef, dst: EntityRef, kind: EdgeKind) {
        if let (Some(s), Some(d)) = (self.id(src), self.id(dst)) {
            if s != d {
                edges.insert(CodeEdge::new(s.clone(), d.clone(), kind));
            }
        }
    }

    /// Unique entity in file `f` matching `pred`.
    fn unique(&self, f: usize, pred: impl Fn(usize) -> bool) -> Option<EntityRef> {
        let mut hits = (0..self.files[f].symbols.entities.len()).filter(|&e| pred(e));
        let first = hits.next()?;
        match hits.next() {
            Some(_) => None,
            None => Some((f, first)),
        }
    }

    fn top_level(&self, f: usize, name: &str) -> Option<EntityRef> {
        let entities = &self.files[f].symbols.entities;
        self.unique(f, |e| {
            let ent = &entities[e];
            ent.qualified == name && ent.parent.is_none()
        })
    }

    /// Adds `imports` edges for file `f` and returns its local-name map.
    fn imports(&self, f: usize, edges: &mut BTreeSet<CodeEdge>) -> HashMap<String, EntityRef> {
        let file = &self.files[f];
        let mut map = HashMap::new();
        let file_id = NodeId::new(file.path.clone());
        for import in &file.symbols.imports {
            let mut entity_edge = false;
            let target_file = match self.language {
                Language::Python => {
                    let module_file = self.python_module(&file.path, &import.module);
                    for name in &import.names {
                        let hit = module_file.and_then(|m| self.top_level(m, &name.imported));
                        if let Some(target) = hit {
                            map.insert(name.local.clone(), target);
                            if let Some(id) = self.id(target) {
                                edges.insert(CodeEdge::new(
                                    file_id.clone(),
                                    id.clone(),
                                    EdgeKind::Imports,
                                ));
                                entity_edge = true;
                            }
                        } else if let Some(sub) = self
                            .python_module(&file.path, &join_module(&import.module, &name.imported))
                        {
                            if sub != f {
                                edges.insert(CodeEdge::new(
                                    file_id.clone(),
                                    NodeId::new(self.files[sub].path.clone()),
                                    EdgeKind::Imports,
                                ));
                                entity_edge = true;
                            }
                        }
                    }
                    module_file
                }
                Language::Java => {
                    let (target, member) = self.java_type(&import.module);
                    if let Some(t) = target {
                        let simple = import
                            .names
                            .first()
                            .map(|n| n.imported.as_str())
                            .unwrap_or("");
                        let entities = &self.files[t].symbols.entities;
                        let hit = if member {
                            self.unique(t, |e| entities[e].name == simple)
                        } else {
                            self.top_level(t, simple)
                        };
                        if let Some(target) = hit {
                            map.insert(simple.to_string(), target);
                            if !member {
                                if let Some(id) = self.id(target) {
                                    edges.insert(CodeEdge::new(
                                        file_id.clone(),
                                        id.clone(),
                                        EdgeKind::Imports,
                                    ));
                                    entity_edge = true;
                                }
                            }
                        }
                    }
                    target
                }
                Language::JavaScript | Language::TypeScript => {
                    let target = self.js_module(&file.path, &import.module);
                    if let Some(t) = target {
                        for name in &import.names {
                            if let Some(hit) = self.top_level(t, &name.imported) {
                                map.insert(name.local.clone(), hit);
                                if let Some(id) = self.id(hit) {
                                    edges.insert(CodeEdge::new(
                                        file_id.clone(),
                                        id.clone(),
                                        EdgeKind::Imports,
                                    ));
                                    entity_edge = true;
                                }
                            }
                        }
                    }
                    target
                }
            };
            if let Some(t) = target_file {
                if !entity_edge && t != f {
                    edges.insert(CodeEdge::new(
                        file_id.clone(),
                        NodeId::new(self.files[t].path.clone()),
                        EdgeKind::Imports,
                    ));
                }
            }
        }
        map
    }

    fn call_target(
        &self,
        f: usize,
        caller: usize,
        callee: &str,
        receiver: Receiver,
        imports: &HashMap<String, EntityRef>,
    ) -> Option<EntityRef> {
        let entities = &self.files[f].symbols.entities;
        match receiver {
            Receiver::SelfRef => {
                if let Some(class) = entities[caller].parent {
                    let hit = self.unique(f, |e| {
                        let ent = &entities[e];
                        ent.kind == NodeKind::Function
                            && ent.parent == Some(class)
                            && ent.name == callee
                    });
                    if hit.is_some() {
                        return hit;
                    }
                }
                self.bare_target(f, callee, imports)
            }
            Receiver::Other => self.unique(f, |e| {
                let ent = &entities[e];
                ent.kind == NodeKind::Function && ent.parent.is_some() && ent.name == callee
            }),
            Receiver::None => self.bare_target(f, callee, imports),
        }
    }

    fn bare_target(
        &self,
        f: usize,
        name: &str,
        imports: &HashMap<String, EntityRef>,
    ) -> Option<EntityRef> {
        let entities = &self.files[f].symbols.entities;
        let local: Vec<usize> = (0..entities.len())
            .filter(|&e| entities[e].name == name)
            .collect();
        match local.len() {
            0 => imports
                .get(name)
                .copied()
                .or_else(|| self.same_package(f, name)),
            1 => Some((f, local[0])),
            _ => None,
        }
    }

    /// Java sees same-package types without an import: `Foo` declared in
    /// `Foo.java` next to the referencing file.
    fn same_package(&self, f: usize, name: &str) -> Option<EntityRef> {
        if self.language != Language::Java {
            return None;
        }
        let mut dir = parent_dir(&self.files[f].path);
        let file = format!("{name}.java");
        dir.push(&file);
        let target = *self.by_path.get(dir.join("/").as_str())?;
        if target == f {
            return None;
        }
        self.top_level(target, name)
    }

    fn class_target(
        &self,
        f: usize,
        name: &str,
        imports: &HashMap<String, EntityRef>,
    ) -> Option<EntityRef> {
        let entities = &self.files[f].symbols.entities;
        let local: Vec<usize> = (0..entities.len())
            .filter(|&e| entities[e].kind == NodeKind::Class && entities[e].name == name)
            .collect();
        match local.len() {
            0 => imports
                .get(name)
                .copied()
                .or_else(|| self.same_package(f, name))
                .filter(|&(g, e)| self.files[g].symbols.entities[e].kind == NodeKind::Class),
            1 => Some((f, local[0])),
            _ => None,
        }
    }

    /// Exact path match, else a unique file whose path ends with `/<rel>`.
    fn lookup(&self, candidates: &[String]) -> Option<usize> {
        for c in candidates {
            if let Some(&i) = self.by_path.get(c.as_str()) {
                return Some(i);
            }
        }
        for c in candidates {
            let suffix = format!("/{c}");
            let mut hits = self
                .files
                .iter()
                .enumerate()
                .filter(|(_, f)| f.path.ends_with(&suffix));
            if let (Some((i, _)), None) = (hits.next(), hits.next()) {
                return Some(i);
            }
        }
        None
    }

    fn python_module(&self, from: &str, module: &str) -> Option<usize> {
        let dots = module.chars().take_while(|&c| c == '.').count();
        let rest = module[dots..].replace('.', "/");
        if dots == 0 {
            if rest.is_empty() {
                return None;
            }
            return self.lookup(&[format!("{rest}.py"), format!("{rest}/__init__.py")]);
        }
        let mut base: Vec<&str> = parent_dir(from);
        for _ in 1..dots {
            base.pop()?;
        }
        let base = base.join("/");
        let prefix = if base.is_empty() {
            String::new()
        } else {
            format!("{base}/")
        };
        let candidates = if rest.is_empty() {
            vec![format!("{prefix}__init__.py")]
        } else {
            vec![
                format!("{prefix}{rest}.py"),
                format!("{prefix}{rest}/__init__.py"),
            ]
        };
        candidates
            .iter()
            .find_map(|c| self.by_path.get(c.as_str()).copied())
    }

    /// File declaring the imported Java type; the flag is set when the last
    /// segment had to be dropped (static member import).
    fn java_type(&self, qualified: &str) -> (Option<usize>, bool) {
        let path = qualified.replace('.', "/");
        if let Some(i) = self.lookup(&[format!("{path}.java")]) {
            return (Some(i), false);
        }
        match path.rsplit_once('/') {
            Some((owner, _)) => (self.lookup(&[format!("{owner}.java")]), true),
            None => (None, false),
        }
    }

    fn js_module(&self, from: &str, spec: &str) -> Option<usize> {
        if !spec.starts_with('.') {
            return None;
        }
        let mut parts = parent_dir(from);
        for seg in spec.split('/') {
            match seg {
                "" | "." => {}
                ".." => {
                    parts.pop()?;
                }
                s => parts.push(s),
            }
        }
        let joined = parts.join("/");
        let ext = self.language.extension();
        let mut candidates = vec![
            joined.clone(),
            format!("{joined}.{ext}"),
            format!("{joined}/index.{ext}"),
        ];
        if self.language == Language::TypeScript {
            if let Some(stem) = joined.strip_suffix(".js") {
                candidates.push(format!("{stem}.ts"));
            }
        }
        candidates
            .iter()
            .find_map(|c| self.by_path.get(c.as_str()).copied())
    }
}

fn parent_dir(path: &str) -> Vec<&str> {
    let mut parts: Vec<&str> = path.split('/').collect();
    parts.pop();
    parts
}

fn join_module(module: &str, name: &str) -> String {
    if module.ends_with('.') || module.is_empty() {
        format!("{module}{name}")
    } else {
        format!("{module}.{name}")
    }
}
