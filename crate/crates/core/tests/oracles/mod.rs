//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

pub mod grammar;

use std::collections::BTreeSet;

use proptest::prelude::*;
use qlcheck::synthesis::{GenNode, NodeKind, QueryTree};
use serde_json::Value;

use grammar::RSelection;

/// Brute-force (parent index, child index) pairs: every node whose
/// `field_id` equals another node's `object_id`.
pub fn join(nodes: &[GenNode]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (i, p) in nodes.iter().enumerate() {
        for (j, c) in nodes.iter().enumerate() {
            if p.object_id.is_some() && c.field_id == p.object_id {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Tree built straight from [`join`], children in flat order.
pub fn tree_from_join(nodes: &[GenNode]) -> Option<QueryTree> {
    let edges = join(nodes);
    let root = nodes.iter().position(|n| n.field_id.is_none())?;
    fn build(i: usize, nodes: &[GenNode], edges: &BTreeSet<(usize, usize)>) -> QueryTree {
        QueryTree {
            name: nodes[i].name.clone(),
            args: nodes[i].args.clone(),
            fragment_on: nodes[i].fragment_on.clone(),
            children: edges
                .iter()
                .filter(|(p, _)| *p == i)
                .map(|&(_, c)| build(c, nodes, edges))
                .collect(),
        }
    }
    Some(build(root, nodes, &edges))
}

/// Reference cleaning: a node survives iff it is a leaf field or an object
/// with at least one surviving child.
pub fn reference_clean(nodes: &[GenNode]) -> Vec<GenNode> {
    fn alive(i: usize, nodes: &[GenNode]) -> bool {
        match nodes[i].object_id {
            None => !nodes[i].is_object(),
            Some(id) => nodes
                .iter()
                .enumerate()
                .any(|(j, c)| c.field_id == Some(id) && alive(j, nodes)),
        }
    }
    let kept: Vec<GenNode> = (0..nodes.len())
        .filter(|&i| alive(i, nodes))
        .map(|i| nodes[i].clone())
        .collect();
    if kept.iter().any(|n| n.field_id.is_none()) {
        kept
    } else {
        Vec::new()
    }
}

/// Field types read straight from introspection JSON: `(type, field)` to
/// the named output type.
pub fn field_type(introspection: &Value, type_name: &str, field: &str) -> Option<String> {
    let schema = introspection.get("__schema").unwrap_or(introspection);
    let t = schema["types"]
        .as_array()?
        .iter()
        .find(|t| t["name"].as_str() == Some(type_name))?;
    let f = t["fields"]
        .as_array()?
        .iter()
        .find(|f| f["name"].as_str() == Some(field))?;
    let mut ty = &f["type"];
    while ty["name"].is_null() {
        ty = &ty["ofType"];
    }
    ty["name"].as_str().map(str::to_owned)
}

/// `(Type, field)` pairs selected by a query parsed with the reference
/// grammar, resolved against introspection JSON.
pub fn reference_tuples(
    introspection: &Value,
    root_type: &str,
    selection: &[RSelection],
) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    walk(introspection, root_type, selection, &mut out);
    out
}

fn walk(
    introspection: &Value,
    parent: &str,
    selection: &[RSelection],
    out: &mut BTreeSet<(String, String)>,
) {
    for s in selection {
        match s {
            RSelection::Field {
                name, selection, ..
            } => {
                if name.starts_with("__") {
                    continue;
                }
                if let Some(ty) = field_type(introspection, parent, name) {
                    out.insert((parent.to_owned(), name.clone()));
                    walk(introspection, &ty, selection, out);
                }
            }
            RSelection::Inline { on, selection } => {
                walk(
                    introspection,
                    on.as_deref().unwrap_or(parent),
                    selection,
                    out,
                );
            }
            RSelection::Spread(_) => {}
        }
    }
}

/// Random flat lists: each node hangs off an earlier object node, object
/// ids are unique, generations follow their parent.
pub fn random_flat() -> impl Strategy<Value = Vec<GenNode>> {
    prop::collection::vec((any::<prop::sample::Index>(), any::<bool>()), 0..40).prop_map(|spec| {
        let mut nodes = vec![node("root", true, Some(0), None, 0)];
        let mut next_id = 1;
        for (k, (parent_pick, is_object)) in spec.into_iter().enumerate() {
            let objects: Vec<(u32, u32)> = nodes
                .iter()
                .filter_map(|n| n.object_id.map(|id| (id, n.generation)))
                .collect();
            let (parent, generation) = objects[parent_pick.index(objects.len())];
            let id = is_object.then(|| {
                next_id += 1;
                next_id - 1
            });
            nodes.push(node(
                &format!("f{k}"),
                is_object,
                id,
                Some(parent),
                generation + 1,
            ));
        }
        nodes
    })
}

fn node(
    name: &str,
    object: bool,
    object_id: Option<u32>,
    field_id: Option<u32>,
    generation: u32,
) -> GenNode {
    GenNode {
        name: name.to_owned(),
        kind: if object {
            NodeKind::Object
        } else {
            NodeKind::Scalar
        },
        type_name: if object { "T".into() } else { "String".into() },
        object_id,
        field_id,
        generation,
        args: Vec::new(),
        fragment_on: None,
    }
}
