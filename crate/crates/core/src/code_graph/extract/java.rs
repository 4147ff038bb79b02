use tree_sitter::Node;

use super::{last_segment, ImportedName, RawImport, Receiver, Walker};
use crate::code_graph::NodeKind;

const TYPE_DECLS: &[&str] = &[
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "annotation_type_declaration",
];

const METHOD_DECLS: &[&str] = &[
    "method_declaration",
    "constructor_declaration",
    "compact_constructor_declaration",
];

pub(super) fn walk(w: &mut Walker, node: Node) {
    let kind = node.kind();
    if TYPE_DECLS.contains(&kind) {
        let name = field_text(w, node, "name");
        let bases = base_types(w, node);
        w.enter(NodeKind::Class, &name, node, bases, None);
        w.children(node, walk);
        w.leave();
        return;
    }
    if METHOD_DECLS.contains(&kind) {
        let name = field_text(w, node, "name");
        w.enter(NodeKind::Function, &name, node, Vec::new(), None);
        w.children(node, walk);
        w.leave();
        return;
    }
    match kind {
        "method_invocation" => {
            let name = field_text(w, node, "name");
            let receiver = match node.child_by_field_name("object") {
                None => Receiver::SelfRef,
                Some(obj) if obj.kind() == "this" => Receiver::SelfRef,
                Some(_) => Receiver::Other,
            };
            w.call(&name, receiver);
            w.children(node, walk);
        }
        "object_creation_expression" => {
            if let Some(ty) = node.child_by_field_name("type") {
                w.call(&last_segment(w.text(ty)), Receiver::None);
            }
            w.children(node, walk);
        }
        "import_declaration" => {
            let text = w.text(node);
            let body = text
                .trim_start_matches("import")
                .trim_end_matches(';')
                .trim();
            let body = body.strip_prefix("static").map(str::trim).unwrap_or(body);
            let path: String = body.split_whitespace().collect();
            if path.ends_with(".*") {
                return;
            }
            let simple = last_segment(&path);
            w.import(RawImport {
                module: path,
                names: vec![ImportedName {
                    imported: simple.clone(),
                    local: simple,
                }],
            });
        }
        _ => w.children(node, walk),
    }
}

fn field_text(w: &Walker, node: Node, field: &str) -> String {
    node.child_by_field_name(field)
        .map(|n| w.text(n).to_string())
        .unwrap_or_default()
}

fn base_types(w: &Walker, node: Node) -> Vec<String> {
    let mut bases = Vec::new();
    let mut collect = |list: Node| {
        let mut stack = vec![list];
        while let Some(n) = stack.pop() {
            match n.kind() {
                "type_identifier" | "scoped_type_identifier" | "generic_type" => {
                    bases.push(last_segment(w.text(n)));
                }
                _ => {
                    let mut cursor = n.walk();
                    let kids: Vec<Node> = n.named_children(&mut cursor).collect();
                    stack.extend(kids.into_iter().rev());
                }
            }
        }
    };
    if let Some(sup) = node.child_by_field_name("superclass") {
        collect(sup);
    }
    if let Some(ifaces) = node.child_by_field_name("interfaces") {
        collect(ifaces);
    }
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        if child.kind() == "extends_interfaces" {
            collect(child);
        }
    }
    bases
}
