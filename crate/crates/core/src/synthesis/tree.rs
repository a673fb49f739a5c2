use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{GenNode, SynthesisError};
use crate::schema::Operation;
use crate::value::ArgValue;

/// A nested selection. Leaves are scalar or enum fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTree {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<(String, ArgValue)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fragment_on: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<QueryTree>,
}

impl QueryTree {
    pub fn leaf(name: impl Into<String>) -> Self {
        QueryTree {
            name: name.into(),
            args: Vec::new(),
            fragment_on: None,
            children: Vec::new(),
        }
    }

    pub fn with_children(name: impl Into<String>, children: Vec<QueryTree>) -> Self {
        QueryTree {
            children,
            ..QueryTree::leaf(name)
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(QueryTree::node_count)
            .sum::<usize>()
    }

    /// Depth in nodes; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(QueryTree::depth)
            .max()
            .unwrap_or(0)
    }

    fn from_node(node: &GenNode) -> Self {
        QueryTree {
            name: node.name.clone(),
            args: node.args.clone(),
            fragment_on: node.fragment_on.clone(),
            children: Vec::new(),
        }
    }
}

/// Fold a cleaned flat list into a tree.
///
/// Works from the last generation back to the first, attaching each node to
/// the node whose `object_id` equals its `field_id`. Children keep their
/// flat-list order.
pub fn build_tree(nodes: &[GenNode]) -> Result<QueryTree, SynthesisError> {
    let roots = nodes.iter().filter(|n| n.field_id.is_none()).count();
    if roots != 1 {
        return Err(SynthesisError::RootCount(roots));
    }
    let known: HashMap<u32, usize> = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| n.object_id.map(|id| (id, i)))
        .collect();
    for n in nodes {
        if let Some(field_id) = n.field_id {
            if !known.contains_key(&field_id) {
                return Err(SynthesisError::OrphanNode {
                    name: n.name.clone(),
                    field_id,
                });
            }
        }
    }

    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        nodes[b]
            .generation
            .cmp(&nodes[a].generation)
            .then(b.cmp(&a))
    });

    // Children are pushed in reverse flat order and flipped when their
    // parent is assembled.
    let mut pending: HashMap<u32, Vec<QueryTree>> = HashMap::new();
    let mut root = None;
    for i in order {
        let node = &nodes[i];
        let mut tree = QueryTree::from_node(node);
        if let Some(id) = node.object_id {
            let mut children = pending.remove(&id).unwrap_or_default();
            children.reverse();
            tree.children = children;
        }
        match node.field_id {
            Some(parent) => pending.entry(parent).or_default().push(tree),
            None => root = Some(tree),
        }
    }
    // Anything left over hangs off a node of a later generation than itself.
    if let Some((&field_id, children)) = pending.iter().next() {
        return Err(SynthesisError::OrphanNode {
            name: children[0].name.clone(),
            field_id,
        });
    }
    root.ok_or(SynthesisError::RootCount(0))
}

/// Render the tree as GraphQL query text, e.g. `{ person { pet { name } } }`.
pub fn serialize(tree: &QueryTree, operation: Operation) -> String {
    let mut out = String::new();
    if operation == Operation::Mutation {
        out.push_str("mutation ");
    }
    out.push_str("{ ");
    write_field(tree, &mut out);
    out.push_str(" }");
    out
}

/// The standard HTTP request body for a query.
pub fn envelope(query: &str) -> Value {
    json!({ "query": query })
}

fn write_field(tree: &QueryTree, out: &mut String) {
    out.push_str(&tree.name);
    if !tree.args.is_empty() {
        out.push('(');
        for (i, (name, value)) in tree.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(name);
            out.push_str(": ");
            value.write_literal(out);
        }
        out.push(')');
    }
    if tree.children.is_empty() {
        return;
    }
    out.push_str(" { ");
    let mut first = true;
    let mut sep = |out: &mut String| {
        if !first {
            out.push(' ');
        }
        first = false;
    };
    for child in tree.children.iter().filter(|c| c.fragment_on.is_none()) {
        sep(out);
        write_field(child, out);
    }
    let mut fragments: Vec<&str> = Vec::new();
    for frag in tree
        .children
        .iter()
        .filter_map(|c| c.fragment_on.as_deref())
    {
        if !fragments.contains(&frag) {
            fragments.push(frag);
        }
    }
    for frag in fragments {
        sep(out);
        out.push_str("... on ");
        out.push_str(frag);
        out.push_str(" { ");
        let mut inner_first = true;
        for child in tree
            .children
            .iter()
            .filter(|c| c.fragment_on.as_deref() == Some(frag))
        {
            if !inner_first {
                out.push(' ');
            }
            inner_first = false;
            write_field(child, out);
        }
        out.push_str(" }");
    }
    out.push_str(" }");
}
