#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use spider_core::code_graph::{build_graph, CodeGraph};
use spider_core::{EdgeKind, Language, NodeKind};

pub fn fixture(name: &str) -> PathBuf {
    // resolves from any crate in the workspace
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

pub fn build(name: &str, language: Language) -> CodeGraph {
    let out = build_graph(&fixture(name), language).expect("fixture builds");
    assert!(
        out.diagnostics.is_empty(),
        "unexpected diagnostics: {:?}",
        out.diagnostics
    );
    out.graph
}

pub type NodeRow = (String, NodeKind, (u32, u32));
pub type EdgeRow = (String, String, EdgeKind);

pub fn node_rows(g: &CodeGraph) -> BTreeSet<NodeRow> {
    g.nodes()
        .iter()
        .map(|n| (n.id.to_string(), n.kind, n.span))
        .collect()
}

pub fn edge_rows(g: &CodeGraph) -> BTreeSet<EdgeRow> {
    g.edges()
        .iter()
        .map(|e| (e.src.to_string(), e.dst.to_string(), e.kind))
        .collect()
}

pub fn nodes(rows: &[(&str, NodeKind, (u32, u32))]) -> BTreeSet<NodeRow> {
    rows.iter()
        .map(|(id, k, s)| (id.to_string(), *k, *s))
        .collect()
}

pub fn edges(rows: &[(&str, &str, EdgeKind)]) -> BTreeSet<EdgeRow> {
    rows.iter()
        .map(|(a, b, k)| (a.to_string(), b.to_string(), *k))
        .collect()
}

/// Hand-enumerated expectations for the four language fixtures.
pub struct Expected {
    pub name: &'static str,
    pub language: Language,
    pub nodes: BTreeSet<NodeRow>,
    pub edges: BTreeSet<EdgeRow>,
}

pub fn expected_fixtures() -> Vec<Expected> {
    use EdgeKind::*;
    use NodeKind::*;
    vec![
        Expected {
            name: "py_mini",
            language: Language::Python,
            nodes: nodes(&[
                ("", Directory, (0, 0)),
                ("a.py", File, (1, 6)),
                ("b.py", File, (1, 5)),
                ("a.py::A@1", Class, (1, 6)),
                ("a.py::A.f@2", Function, (2, 3)),
                ("a.py::A.g@5", Function, (5, 6)),
                ("b.py::h@4", Function, (4, 5)),
            ]),
            edges: edges(&[
                ("", "a.py", Contains),
                ("", "b.py", Contains),
                ("a.py", "a.py::A@1", Contains),
                ("a.py::A@1", "a.py::A.f@2", Contains),
                ("a.py::A@1", "a.py::A.g@5", Contains),
                ("b.py", "b.py::h@4", Contains),
                ("a.py::A.f@2", "a.py::A.g@5", Invokes),
                ("b.py::h@4", "a.py::A@1", Invokes),
                ("b.py", "a.py::A@1", Imports),
            ]),
        },
        Expected {
            name: "java_mini",
            language: Language::Java,
            nodes: nodes(&[
                ("", Directory, (0, 0)),
                ("src", Directory, (0, 0)),
                ("src/com", Directory, (0, 0)),
                ("src/com/acme", Directory, (0, 0)),
                ("src/com/acme/util", Directory, (0, 0)),
                ("src/com/acme/Shape.java", File, (1, 9)),
                ("src/com/acme/Circle.java", File, (1, 14)),
                ("src/com/acme/App.java", File, (1, 10)),
                ("src/com/acme/util/Strings.java", File, (1, 9)),
                ("src/com/acme/Shape.java::Shape@3", Class, (3, 9)),
                ("src/com/acme/Shape.java::Shape.area@4", Function, (4, 4)),
                (
                    "src/com/acme/Shape.java::Shape.describe@6",
                    Function,
                    (6, 8),
                ),
                ("src/com/acme/Circle.java::Circle@3", Class, (3, 14)),
                (
                    "src/com/acme/Circle.java::Circle.Circle@6",
                    Function,
                    (6, 8),
                ),
                (
                    "src/com/acme/Circle.java::Circle.area@10",
                    Function,
                    (10, 13),
                ),
                ("src/com/acme/App.java::App@5", Class, (5, 10)),
                ("src/com/acme/App.java::App.main@6", Function, (6, 9)),
                ("src/com/acme/util/Strings.java::Strings@3", Class, (3, 9)),
                (
                    "src/com/acme/util/Strings.java::Strings.Strings@4",
                    Function,
                    (4, 4),
                ),
                (
                    "src/com/acme/util/Strings.java::Strings.upper@6",
                    Function,
                    (6, 8),
                ),
            ]),
            edges: edges(&[
                ("", "src", Contains),
                ("src", "src/com", Contains),
                ("src/com", "src/com/acme", Contains),
                ("src/com/acme", "src/com/acme/util", Contains),
                ("src/com/acme", "src/com/acme/Shape.java", Contains),
                ("src/com/acme", "src/com/acme/Circle.java", Contains),
                ("src/com/acme", "src/com/acme/App.java", Contains),
                (
                    "src/com/acme/util",
                    "src/com/acme/util/Strings.java",
                    Contains,
                ),
                (
                    "src/com/acme/Shape.java",
                    "src/com/acme/Shape.java::Shape@3",
                    Contains,
                ),
                (
                    "src/com/acme/Shape.java::Shape@3",
                    "src/com/acme/Shape.java::Shape.area@4",
                    Contains,
                ),
                (
                    "src/com/acme/Shape.java::Shape@3",
                    "src/com/acme/Shape.java::Shape.describe@6",
                    Contains,
                ),
                (
                    "src/com/acme/Circle.java",
                    "src/com/acme/Circle.java::Circle@3",
                    Contains,
                ),
                (
                    "src/com/acme/Circle.java::Circle@3",
                    "src/com/acme/Circle.java::Circle.Circle@6",
                    Contains,
                ),
                (
                    "src/com/acme/Circle.java::Circle@3",
                    "src/com/acme/Circle.java::Circle.area@10",
                    Contains,
                ),
                (
                    "src/com/acme/App.java",
                    "src/com/acme/App.java::App@5",
                    Contains,
                ),
                (
                    "src/com/acme/App.java::App@5",
                    "src/com/acme/App.java::App.main@6",
                    Contains,
                ),
                (
                    "src/com/acme/util/Strings.java",
                    "src/com/acme/util/Strings.java::Strings@3",
                    Contains,
                ),
                (
                    "src/com/acme/util/Strings.java::Strings@3",
                    "src/com/acme/util/Strings.java::Strings.Strings@4",
                    Contains,
                ),
                (
                    "src/com/acme/util/Strings.java::Strings@3",
                    "src/com/acme/util/Strings.java::Strings.upper@6",
                    Contains,
                ),
                (
                    "src/com/acme/Shape.java::Shape.describe@6",
                    "src/com/acme/Shape.java::Shape.area@4",
                    Invokes,
                ),
                (
                    "src/com/acme/App.java::App.main@6",
                    "src/com/acme/Circle.java::Circle@3",
                    Invokes,
                ),
                (
                    "src/com/acme/Circle.java::Circle@3",
                    "src/com/acme/Shape.java::Shape@3",
                    Inherits,
                ),
                (
                    "src/com/acme/App.java",
                    "src/com/acme/util/Strings.java::Strings@3",
                    Imports,
                ),
            ]),
        },
        Expected {
            name: "js_proto",
            language: Language::JavaScript,
            nodes: nodes(&[
                ("", Directory, (0, 0)),
                ("lib", Directory, (0, 0)),
                ("main.js", File, (1, 10)),
                ("shapes.js", File, (1, 24)),
                ("lib/util.js", File, (1, 5)),
                ("shapes.js::Shape@1", Class, (1, 3)),
                ("shapes.js::Shape.constructor@1", Function, (1, 3)),
                ("shapes.js::Shape.area@5", Function, (5, 7)),
                ("shapes.js::Shape.describe@9", Function, (9, 11)),
                ("shapes.js::Circle@13", Class, (13, 22)),
                ("shapes.js::Circle.constructor@14", Function, (14, 17)),
                ("shapes.js::Circle.area@19", Function, (19, 21)),
                ("main.js::total@4", Function, (4, 6)),
                ("main.js::makeCircle@8", Function, (8, 8)),
                ("lib/util.js::clamp@1", Function, (1, 3)),
            ]),
            edges: edges(&[
                ("", "lib", Contains),
                ("", "main.js", Contains),
                ("", "shapes.js", Contains),
                ("lib", "lib/util.js", Contains),
                ("shapes.js", "shapes.js::Shape@1", Contains),
                ("shapes.js", "shapes.js::Circle@13", Contains),
                (
                    "shapes.js::Shape@1",
                    "shapes.js::Shape.constructor@1",
                    Contains,
                ),
                ("shapes.js::Shape@1", "shapes.js::Shape.area@5", Contains),
                (
                    "shapes.js::Shape@1",
                    "shapes.js::Shape.describe@9",
                    Contains,
                ),
                (
                    "shapes.js::Circle@13",
                    "shapes.js::Circle.constructor@14",
                    Contains,
                ),
                (
                    "shapes.js::Circle@13",
                    "shapes.js::Circle.area@19",
                    Contains,
                ),
                ("main.js", "main.js::total@4", Contains),
                ("main.js", "main.js::makeCircle@8", Contains),
                ("lib/util.js", "lib/util.js::clamp@1", Contains),
                (
                    "shapes.js::Shape.describe@9",
                    "shapes.js::Shape.area@5",
                    Invokes,
                ),
                ("main.js::total@4", "lib/util.js::clamp@1", Invokes),
                ("main.js::makeCircle@8", "shapes.js::Circle@13", Invokes),
                ("shapes.js::Circle@13", "shapes.js::Shape@1", Inherits),
                ("main.js", "shapes.js::Shape@1", Imports),
                ("main.js", "shapes.js::Circle@13", Imports),
                ("main.js", "lib/util.js::clamp@1", Imports),
            ]),
        },
        Expected {
            name: "ts_mini",
            language: Language::TypeScript,
            nodes: nodes(&[
                ("", Directory, (0, 0)),
                ("src", Directory, (0, 0)),
                ("src/models", Directory, (0, 0)),
                ("src/services", Directory, (0, 0)),
                ("src/models/user.ts", File, (1, 17)),
                ("src/services/greeter.ts", File, (1, 8)),
                ("src/services/format.ts", File, (1, 5)),
                ("src/models/user.ts::User@5", Class, (5, 11)),
                ("src/models/user.ts::User.constructor@6", Function, (6, 6)),
                ("src/models/user.ts::User.greet@8", Function, (8, 10)),
                ("src/models/user.ts::Admin@13", Class, (13, 17)),
                ("src/models/user.ts::Admin.greet@14", Function, (14, 16)),
                ("src/services/greeter.ts::greetAll@4", Function, (4, 6)),
                ("src/services/greeter.ts::newUser@8", Function, (8, 8)),
                ("src/services/format.ts::format@1", Function, (1, 3)),
            ]),
            edges: edges(&[
                ("", "src", Contains),
                ("src", "src/models", Contains),
                ("src", "src/services", Contains),
                ("src/models", "src/models/user.ts", Contains),
                ("src/services", "src/services/greeter.ts", Contains),
                ("src/services", "src/services/format.ts", Contains),
                ("src/models/user.ts", "src/models/user.ts::User@5", Contains),
                (
                    "src/models/user.ts",
                    "src/models/user.ts::Admin@13",
                    Contains,
                ),
                (
                    "src/models/user.ts::User@5",
                    "src/models/user.ts::User.constructor@6",
                    Contains,
                ),
                (
                    "src/models/user.ts::User@5",
                    "src/models/user.ts::User.greet@8",
                    Contains,
                ),
                (
                    "src/models/user.ts::Admin@13",
                    "src/models/user.ts::Admin.greet@14",
                    Contains,
                ),
                (
                    "src/services/greeter.ts",
                    "src/services/greeter.ts::greetAll@4",
                    Contains,
                ),
                (
                    "src/services/greeter.ts",
                    "src/services/greeter.ts::newUser@8",
                    Contains,
                ),
                (
                    "src/services/format.ts",
                    "src/services/format.ts::format@1",
                    Contains,
                ),
                (
                    "src/services/greeter.ts::greetAll@4",
                    "src/services/format.ts::format@1",
                    Invokes,
                ),
                (
                    "src/services/greeter.ts::newUser@8",
                    "src/models/user.ts::User@5",
                    Invokes,
                ),
                (
                    "src/models/user.ts::Admin@13",
                    "src/models/user.ts::User@5",
                    Inherits,
                ),
                (
                    "src/services/greeter.ts",
                    "src/models/user.ts::User@5",
                    Imports,
                ),
                (
                    "src/services/greeter.ts",
                    "src/services/format.ts::format@1",
                    Imports,
                ),
            ]),
        },
    ]
}

use rand::seq::SliceRandom;
use rand::Rng;
use spider_core::{CodeEdge, CodeNode, NodeId};

/// Random valid graph with `n` nodes: a containment tree obeying the
/// directory/file/class/function rules plus a few random non-containment
/// edges between entities.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> CodeGraph {
    let mut nodes = vec![CodeNode {
        id: NodeId::from(""),
        kind: NodeKind::Directory,
        name: String::new(),
        path: String::new(),
        span: (0, 0),
        content: String::new(),
    }];
    let mut edges = Vec::new();
    while nodes.len() < n.max(1) {
        let i = nodes.len();
        let parent = nodes.choose(rng).unwrap().clone();
        let options: &[NodeKind] = match parent.kind {
            NodeKind::Directory => &[NodeKind::Directory, NodeKind::File],
            NodeKind::File => &[NodeKind::Class, NodeKind::Function, NodeKind::Function],
            NodeKind::Class => &[NodeKind::Function, NodeKind::Function, NodeKind::Class],
            NodeKind::Function => continue,
        };
        let kind = *options.choose(rng).unwrap();
        let prefix = if parent.path.is_empty() {
            String::new()
        } else {
            format!("{}/", parent.path)
        };
        let node = match kind {
            NodeKind::Directory => {
                let path = format!("{prefix}d{i}");
                CodeNode {
                    id: NodeId::new(path.clone()),
                    kind,
                    name: format!("d{i}"),
                    path,
                    span: (0, 0),
                    content: String::new(),
                }
            }
            NodeKind::File => {
                let path = format!("{prefix}f{i}.py");
                CodeNode {
                    id: NodeId::new(path.clone()),
                    kind,
                    name: format!("f{i}.py"),
                    path,
                    span: (1, 1000),
                    content: String::new(),
                }
            }
            _ => {
                let name = format!("e{i}");
                CodeNode {
                    id: NodeId::entity(&parent.path, &name, i as u32),
                    kind,
                    name: name.clone(),
                    path: parent.path.clone(),
                    span: (i as u32, i as u32),
                    content: format!("def {name}(): pass"),
                }
            }
        };
        edges.push(CodeEdge::new(
            parent.id.clone(),
            node.id.clone(),
            EdgeKind::Contains,
        ));
        nodes.push(node);
    }
    let entities: Vec<NodeId> = nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Class | NodeKind::Function))
        .map(|n| n.id.clone())
        .collect();
    if entities.len() >= 2 {
        for _ in 0..rng.gen_range(0..=n / 3) {
            let a = entities.choose(rng).unwrap();
            let b = entities.choose(rng).unwrap();
            if a != b {
                edges.push(CodeEdge::new(a.clone(), b.clone(), EdgeKind::Invokes));
            }
        }
    }
    CodeGraph::new(Language::Python, nodes, edges).expect("generated graph is valid")
}

/// All-pairs shortest paths over undirected contains edges (Floyd–Warshall).
/// `None` means unreachable.
pub fn contains_distances(g: &CodeGraph) -> (Vec<NodeId>, Vec<Vec<Option<usize>>>) {
    let ids: Vec<NodeId> = g.nodes().iter().map(|n| n.id.clone()).collect();
    let pos = |id: &NodeId| ids.iter().position(|x| x == id).unwrap();
    let n = ids.len();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for e in g.edges().iter().filter(|e| e.kind == EdgeKind::Contains) {
        let (a, b) = (pos(&e.src), pos(&e.dst));
        d[a][b] = Some(1);
        d[b][a] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    (ids, d)
}
