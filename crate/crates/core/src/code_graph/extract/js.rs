//! JavaScript and TypeScript share one walker; the TypeScript grammar only
//! adds node kinds (abstract classes, `public_field_definition`,
//! `extends_clause`), which are handled alongside their JS counterparts.
//!
//! Functions are named declarations, class methods and function/arrow
//! expressions bound to a name (variable, assignment target, object key or
//! class field). Anonymous unbound functions are not entities; calls inside
//! them are attributed to the enclosing named function.

use std::collections::HashMap;

use tree_sitter::Node;

use super::{last_segment, FileSymbols, ImportedName, RawEntity, RawImport, Receiver, Walker};
use crate::code_graph::NodeKind;

const FUNCTION_VALUES: &[&str] = &[
    "function_expression",
    "function",
    "arrow_function",
    "generator_function",
];

fn is_function_value(node: Node) -> bool {
    FUNCTION_VALUES.contains(&node.kind())
}

pub(super) fn walk(w: &mut Walker, node: Node) {
    match node.kind() {
        "class_declaration" | "abstract_class_declaration" => {
            let name = field_text(w, node, "name");
            class(w, node, &name);
        }
        "class" => match node.child_by_field_name("name") {
            Some(n) => {
                let name = w.text(n).to_string();
                class(w, node, &name);
            }
            None => w.children(node, walk),
        },
        "function_declaration" | "generator_function_declaration" => {
            let name = field_text(w, node, "name");
            w.enter(NodeKind::Function, &name, node, Vec::new(), None);
            w.children(node, walk);
            w.leave();
        }
        "method_definition" => {
            let name = field_text(w, node, "name");
            w.enter(NodeKind::Function, &name, node, Vec::new(), None);
            w.children(node, walk);
            w.leave();
        }
        "field_definition" | "public_field_definition" => {
            let name_node = node
                .child_by_field_name("property")
                .or_else(|| node.child_by_field_name("name"));
            match (name_node, node.child_by_field_name("value")) {
                (Some(name), Some(value)) if is_function_value(value) => {
                    let name = w.text(name).to_string();
                    w.enter(NodeKind::Function, &name, node, Vec::new(), None);
                    walk(w, value);
                    w.leave();
                }
                _ => w.children(node, walk),
            }
        }
        "variable_declarator" => variable_declarator(w, node),
        "assignment_expression" => assignment(w, node),
        "object" => object_literal(w, node, None, None),
        "call_expression" => {
            if let Some(func) = node.child_by_field_name("function") {
                match func.kind() {
                    "identifier" if w.text(func) == "require" => require(w, node),
                    "identifier" => w.call(w.text(func), Receiver::None),
                    "member_expression" => {
                        let prop = field_text(w, func, "property");
                        let receiver = match func.child_by_field_name("object") {
                            Some(obj) if obj.kind() == "this" => Receiver::SelfRef,
                            _ => Receiver::Other,
                        };
                        w.call(&prop, receiver);
                    }
                    _ => {}
                }
            }
            w.children(node, walk);
        }
        "new_expression" => {
            if let Some(ctor) = node.child_by_field_name("constructor") {
                if matches!(ctor.kind(), "identifier" | "member_expression") {
                    w.call(&last_segment(w.text(ctor)), Receiver::None);
                }
            }
            w.children(node, walk);
        }
        "import_statement" => import_statement(w, node),
        "export_statement" => {
            if let Some(source) = node.child_by_field_name("source") {
                let module = string_value(w, source);
                w.import(RawImport {
                    module,
                    names: Vec::new(),
                });
            }
            w.children(node, walk);
        }
        _ => w.children(node, walk),
    }
}

fn class(w: &mut Walker, node: Node, name: &str) {
    let bases = heritage(w, node);
    w.enter(NodeKind::Class, name, node, bases, None);
    if let Some(body) = node.child_by_field_name("body") {
        w.children(body, walk);
    }
    w.leave();
}

fn heritage(w: &Walker, node: Node) -> Vec<String> {
    let mut bases = Vec::new();
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        if child.kind() != "class_heritage" {
            continue;
        }
        let mut c2 = child.walk();
        for clause in child.named_children(&mut c2) {
            match clause.kind() {
                "extends_clause" => {
                    let mut c3 = clause.walk();
                    for value in clause.children_by_field_name("value", &mut c3) {
                        bases.push(last_segment(w.text(value)));
                    }
                }
                "implements_clause" => {
                    let mut c3 = clause.walk();
                    for ty in clause.named_children(&mut c3) {
                        bases.push(last_segment(w.text(ty)));
                    }
                }
                "identifier" | "member_expression" => bases.push(last_segment(w.text(clause))),
                _ => {}
            }
        }
    }
    bases
}

fn variable_declarator(w: &mut Walker, node: Node) {
    let name_node = node.child_by_field_name("name");
    let value = node.child_by_field_name("value");
    let (Some(name_node), Some(value)) = (name_node, value) else {
        w.children(node, walk);
        return;
    };
    if name_node.kind() != "identifier" {
        w.children(node, walk);
        return;
    }
    let name = w.text(name_node).to_string();
    if is_function_value(value) {
        w.enter(NodeKind::Function, &name, node, Vec::new(), None);
        walk(w, value);
        w.leave();
    } else if value.kind() == "class" {
        let bound = value
            .child_by_field_name("name")
            .map(|n| w.text(n).to_string())
            .unwrap_or(name);
        class(w, value, &bound);
    } else if value.kind() == "object" {
        object_literal(w, value, Some(name), None);
    } else {
        walk(w, value);
    }
}

/// Identifier/`this` chain of a member expression, outermost first:
/// `a.b.c` yields `["a", "b", "c"]`. `None` for computed or call chains.
fn member_chain(w: &Walker, node: Node) -> Option<Vec<String>> {
    match node.kind() {
        "identifier" | "this" | "property_identifier" | "private_property_identifier" => {
            Some(vec![w.text(node).to_string()])
        }
        "member_expression" => {
            let mut chain = member_chain(w, node.child_by_field_name("object")?)?;
            chain.push(w.text(node.child_by_field_name("property")?).to_string());
            Some(chain)
        }
        _ => None,
    }
}

fn assignment(w: &mut Walker, node: Node) {
    let (Some(left), Some(right)) = (
        node.child_by_field_name("left"),
        node.child_by_field_name("right"),
    ) else {
        w.children(node, walk);
        return;
    };
    let Some(chain) = member_chain(w, left) else {
        w.children(node, walk);
        return;
    };

    if is_function_value(right) {
        let name = chain.last().cloned().unwrap_or_default();
        if chain.len() == 3 && chain[1] == "prototype" && chain[0] != "this" {
            let qualified = format!("{}.{}", chain[0], name);
            let idx = w.enter(NodeKind::Function, &name, node, Vec::new(), Some(qualified));
            w.out.entities[idx].prototype_of = Some(chain[0].clone());
        } else if chain.len() == 2 && chain[0] == "this" {
            w.enter(NodeKind::Function, &name, node, Vec::new(), None);
        } else {
            let qualified = w.qualify(&chain.join("."));
            w.enter(NodeKind::Function, &name, node, Vec::new(), Some(qualified));
        }
        walk(w, right);
        w.leave();
    } else if right.kind() == "object" {
        if chain.len() == 2 && chain[1] == "prototype" && chain[0] != "this" {
            object_literal(w, right, None, Some(chain[0].clone()));
        } else {
            let prefix = if chain[0] == "this" {
                &chain[1..]
            } else {
                &chain[..]
            };
            object_literal(w, right, Some(prefix.join(".")), None);
        }
    } else {
        walk(w, right);
    }
}

/// Methods and function-valued keys of an object literal. `prefix` is the
/// binding name of the object; `prototype_of` marks `X.prototype = {...}`.
fn object_literal(
    w: &mut Walker,
    node: Node,
    prefix: Option<String>,
    prototype_of: Option<String>,
) {
    let mut cursor = node.walk();
    let members: Vec<Node> = node.named_children(&mut cursor).collect();
    for member in members {
        let (key, value) = match member.kind() {
            "pair" => (
                member.child_by_field_name("key"),
                member.child_by_field_name("value"),
            ),
            "method_definition" => (member.child_by_field_name("name"), None),
            _ => {
                walk(w, member);
                continue;
            }
        };
        let Some(key) = key else {
            walk(w, member);
            continue;
        };
        if !matches!(key.kind(), "property_identifier" | "string" | "identifier") {
            walk(w, member);
            continue;
        }
        let name = if key.kind() == "string" {
            string_value(w, key)
        } else {
            w.text(key).to_string()
        };
        let qualified = match (&prototype_of, &prefix) {
            (Some(target), _) => Some(format!("{target}.{name}")),
            (None, Some(p)) => Some(w.qualify(&format!("{p}.{name}"))),
            (None, None) => None,
        };
        match value {
            None => {
                let idx = w.enter(NodeKind::Function, &name, member, Vec::new(), qualified);
                w.out.entities[idx].prototype_of = prototype_of.clone();
                w.children(member, walk);
                w.leave();
            }
            Some(v) if is_function_value(v) => {
                let idx = w.enter(NodeKind::Function, &name, member, Vec::new(), qualified);
                w.out.entities[idx].prototype_of = prototype_of.clone();
                walk(w, v);
                w.leave();
            }
            Some(v) if v.kind() == "object" && prototype_of.is_none() => {
                let nested = match &prefix {
                    Some(p) => format!("{p}.{name}"),
                    None => name,
                };
                object_literal(w, v, Some(nested), None);
            }
            Some(v) => walk(w, v),
        }
    }
}

fn string_value(w: &Walker, node: Node) -> String {
    w.text(node)
        .trim_matches(|c| c == '"' || c == '\'' || c == '`')
        .to_string()
}

fn require(w: &mut Walker, call: Node) {
    let Some(args) = call.child_by_field_name("arguments") else {
        return;
    };
    let mut cursor = args.walk();
    let Some(first) = args.named_children(&mut cursor).next() else {
        return;
    };
    if first.kind() != "string" {
        return;
    }
    let module = string_value(w, first);
    let mut names = Vec::new();
    if let Some(parent) = call.parent().filter(|p| p.kind() == "variable_declarator") {
        if let Some(binding) = parent.child_by_field_name("name") {
            if binding.kind() == "object_pattern" {
                let mut c2 = binding.walk();
                for prop in binding.named_children(&mut c2) {
                    match prop.kind() {
                        "shorthand_property_identifier_pattern" => {
                            let n = w.text(prop).to_string();
                            names.push(ImportedName {
                                imported: n.clone(),
                                local: n,
                            });
                        }
                        "pair_pattern" => {
                            if let (Some(k), Some(v)) = (
                                prop.child_by_field_name("key"),
                                prop.child_by_field_name("value"),
                            ) {
                                names.push(ImportedName {
                                    imported: w.text(k).to_string(),
                                    local: w.text(v).to_string(),
                                });
                            }
                        }
                        _ => {}
                    }
                }
            } else if binding.kind() == "identifier" {
                let n = w.text(binding).to_string();
                names.push(ImportedName {
                    imported: n.clone(),
                    local: n,
                });
            }
        }
    }
    w.import(RawImport { module, names });
}

fn import_statement(w: &mut Walker, node: Node) {
    let Some(source) = node.child_by_field_name("source") else {
        return;
    };
    let module = string_value(w, source);
    let mut names = Vec::new();
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        if child.kind() != "import_clause" {
            continue;
        }
        let mut c2 = child.walk();
        for part in child.named_children(&mut c2) {
            match part.kind() {
                "identifier" => {
                    let n = w.text(part).to_string();
                    names.push(ImportedName {
                        imported: n.clone(),
                        local: n,
                    });
                }
                "named_imports" => {
                    let mut c3 = part.walk();
                    for spec in part.named_children(&mut c3) {
                        if spec.kind() != "import_specifier" {
                            continue;
                        }
                        let imported = field_text(w, spec, "name");
                        let local = spec
                            .child_by_field_name("alias")
                            .map(|a| w.text(a).to_string())
                            .unwrap_or_else(|| imported.clone());
                        names.push(ImportedName { imported, local });
                    }
                }
                _ => {}
            }
        }
    }
    w.import(RawImport { module, names });
}

fn field_text(w: &Walker, node: Node, field: &str) -> String {
    node.child_by_field_name(field)
        .map(|n| w.text(n).to_string())
        .unwrap_or_default()
}

/// Re-parent `X.prototype.m` methods under the class `X` when `X` resolves
/// to exactly one class or constructor function in the same file. A
/// constructor function gets a class node of its own (same span) and
/// becomes that class's `constructor` method.
pub(super) fn attach_prototype_methods(out: &mut FileSymbols) {
    let mut promoted: HashMap<String, Option<usize>> = HashMap::new();
    for i in 0..out.entities.len() {
        let Some(target) = out.entities[i].prototype_of.clone() else {
            continue;
        };
        let class_idx = *promoted
            .entry(target.clone())
            .or_insert_with(|| resolve_class(out, &target));
        if let Some(c) = class_idx {
            out.entities[i].parent = Some(c);
        }
    }
}

fn resolve_class(out: &mut FileSymbols, target: &str) -> Option<usize> {
    let classes: Vec<usize> = (0..out.entities.len())
        .filter(|&j| out.entities[j].kind == NodeKind::Class && out.entities[j].name == target)
        .collect();
    if classes.len() == 1 {
        return Some(classes[0]);
    }
    if !classes.is_empty() {
        return None;
    }
    let ctors: Vec<usize> = (0..out.entities.len())
        .filter(|&j| {
            let e = &out.entities[j];
            e.kind == NodeKind::Function && e.name == target && e.prototype_of.is_none()
        })
        .collect();
    let [ctor] = ctors[..] else {
        return None;
    };

    let func = out.entities[ctor].clone();
    let class = RawEntity {
        kind: NodeKind::Class,
        name: func.name.clone(),
        qualified: func.qualified.clone(),
        span: func.span,
        content: func.content.clone(),
        parent: func.parent,
        bases: Vec::new(),
        prototype_of: None,
    };
    out.entities.push(class);
    let class_idx = out.entities.len() - 1;

    let nested_prefix = format!("{}.", func.qualified);
    for (j, e) in out.entities.iter_mut().enumerate() {
        if j == ctor || j == class_idx {
            continue;
        }
        if e.parent == func.parent
            && e.span.0 >= func.span.0
            && e.span.1 <= func.span.1
            && e.qualified.starts_with(&nested_prefix)
        {
            e.parent = Some(class_idx);
        }
    }
    let ctor_entity = &mut out.entities[ctor];
    ctor_entity.name = "constructor".to_string();
    ctor_entity.qualified = format!("{}.constructor", func.qualified);
    ctor_entity.parent = Some(class_idx);
    Some(class_idx)
}
