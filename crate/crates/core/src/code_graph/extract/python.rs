use tree_sitter::Node;

use super::{last_segment, ImportedName, RawImport, Receiver, Walker};
use crate::code_graph::NodeKind;

pub(super) fn walk(w: &mut Walker, node: Node) {
    match node.kind() {
        "class_definition" => {
            let name = field_text(w, node, "name");
            let mut bases = Vec::new();
            if let Some(args) = node.child_by_field_name("superclasses") {
                let mut cursor = args.walk();
                for arg in args.named_children(&mut cursor) {
                    if matches!(arg.kind(), "identifier" | "attribute") {
                        bases.push(last_segment(w.text(arg)));
                    }
                }
            }
            w.enter(NodeKind::Class, &name, node, bases, None);
            visit_field(w, node, "body");
            w.leave();
        }
        "function_definition" => {
            let name = field_text(w, node, "name");
            w.enter(NodeKind::Function, &name, node, Vec::new(), None);
            visit_field(w, node, "body");
            w.leave();
        }
        "call" => {
            if let Some(func) = node.child_by_field_name("function") {
                match func.kind() {
                    "identifier" => w.call(w.text(func), Receiver::None),
                    "attribute" => {
                        let attr = field_text(w, func, "attribute");
                        let receiver = match func.child_by_field_name("object") {
                            Some(obj) if matches!(w.text(obj), "self" | "cls") => Receiver::SelfRef,
                            _ => Receiver::Other,
                        };
                        w.call(&attr, receiver);
                    }
                    _ => {}
                }
            }
            w.children(node, walk);
        }
        "import_statement" => {
            let mut cursor = node.walk();
            let names: Vec<Node> = node.children_by_field_name("name", &mut cursor).collect();
            for name in names {
                let (module, _) = aliased(w, name);
                w.import(RawImport {
                    module,
                    names: Vec::new(),
                });
            }
        }
        "import_from_statement" => {
            let module = node
                .child_by_field_name("module_name")
                .map(|m| w.text(m).split_whitespace().collect::<String>())
                .unwrap_or_default();
            let mut cursor = node.walk();
            let names = node
                .children_by_field_name("name", &mut cursor)
                .map(|n| {
                    let (imported, local) = aliased(w, n);
                    ImportedName { imported, local }
                })
                .collect();
            w.import(RawImport { module, names });
        }
        _ => w.children(node, walk),
    }
}

fn field_text(w: &Walker, node: Node, field: &str) -> String {
    node.child_by_field_name(field)
        .map(|n| w.text(n).to_string())
        .unwrap_or_default()
}

fn visit_field(w: &mut Walker, node: Node, field: &str) {
    if let Some(child) = node.child_by_field_name(field) {
        walk(w, child);
    }
}

/// `(dotted name, local binding)` for `dotted_name` or `aliased_import`.
fn aliased(w: &Walker, node: Node) -> (String, String) {
    if node.kind() == "aliased_import" {
        let name = field_text(w, node, "name");
        let alias = field_text(w, node, "alias");
        (name, alias)
    } else {
        let name = w.text(node).to_string();
        let local = name.split('.').next().unwrap_or(&name).to_string();
        (name, local)
    }
}
