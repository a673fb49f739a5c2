//! Greedy reduction of failing queries.
//!
//! Passes, repeated until none of them makes progress:
//!
//! 1. drop the highest generation of the flat list,
//! 2. drop one subtree at a time,
//! 3. shrink arguments: remove optional ones, replace values by minimal
//!    literals, halve strings.
//!
//! Every candidate is cleaned, rebuilt and re-executed; it is kept only if
//! it still fails.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::schema::SchemaModel;
use crate::synthesis::{build_tree, serialize, FlatQuery, GenNode, QueryTree};
use crate::value::ArgValue;

/// Executions allowed per shrink.
pub const SHRINK_BUDGET: u32 = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkOutcome {
    pub flat: FlatQuery,
    pub tree: QueryTree,
    pub query: String,
    pub executions: u32,
    pub budget_exceeded: bool,
}

struct Shrinker<'a, F> {
    schema: &'a SchemaModel,
    still_fails: F,
    tried: HashSet<String>,
    executions: u32,
    budget: u32,
    exhausted: bool,
}

impl<F: FnMut(&QueryTree, &str) -> bool> Shrinker<'_, F> {
    /// Whether `candidate` is a valid, still-failing query.
    fn accepts(&mut self, candidate: &FlatQuery) -> bool {
        if self.exhausted {
            return false;
        }
        let cleaned = candidate.cleaned();
        if cleaned.nodes.is_empty() {
            return false;
        }
        let Ok(tree) = build_tree(&cleaned.nodes) else {
            return false;
        };
        let text = serialize(&tree, cleaned.operation);
        if !self.tried.insert(text.clone()) {
            return false;
        }
        if self.executions >= self.budget {
            self.exhausted = true;
            return false;
        }
        self.executions += 1;
        (self.still_fails)(&tree, &text)
    }
}

/// Shrink `flat`, which is assumed to fail. `still_fails` receives the
/// candidate tree and its query text and executes it.
pub fn shrink(
    flat: &FlatQuery,
    schema: &SchemaModel,
    budget: u32,
    still_fails: impl FnMut(&QueryTree, &str) -> bool,
) -> ShrinkOutcome {
    let mut current = flat.cleaned();
    let mut sh = Shrinker {
        schema,
        still_fails,
        tried: HashSet::new(),
        executions: 0,
        budget,
        exhausted: false,
    };
    if let Ok(tree) = build_tree(&current.nodes) {
        sh.tried.insert(serialize(&tree, current.operation));
    }

    loop {
        let mut progress = false;
        while let Some(next) = truncate_generation(&current) {
            if !sh.accepts(&next) {
                break;
            }
            current = next.cleaned();
            progress = true;
        }
        let mut i = 1;
        while i < current.nodes.len() {
            let next = remove_subtree(&current, i);
            if sh.accepts(&next) {
                current = next.cleaned();
                progress = true;
            } else {
                i += 1;
            }
        }
        for i in 0..current.nodes.len() {
            let mut j = 0;
            while j < current.nodes[i].args.len() {
                let mut advanced = true;
                for next in arg_candidates(&current, i, j, sh.schema) {
                    if sh.accepts(&next) {
                        let removed = next.nodes[i].args.len() < current.nodes[i].args.len();
                        current = next;
                        progress = true;
                        advanced = !removed;
                        break;
                    }
                }
                if advanced {
                    j += 1;
                }
            }
        }
        if !progress || sh.exhausted {
            break;
        }
    }

    let tree = build_tree(&current.nodes).expect("accepted candidates build");
    let query = serialize(&tree, current.operation);
    ShrinkOutcome {
        flat: current,
        tree,
        query,
        executions: sh.executions,
        budget_exceeded: sh.exhausted,
    }
}

fn truncate_generation(flat: &FlatQuery) -> Option<FlatQuery> {
    let top = flat.max_generation()?;
    if top == 0 {
        return None;
    }
    Some(FlatQuery {
        operation: flat.operation,
        nodes: flat
            .nodes
            .iter()
            .filter(|n| n.generation < top)
            .cloned()
            .collect(),
    })
}

/// Remove node `index` and everything below it.
fn remove_subtree(flat: &FlatQuery, index: usize) -> FlatQuery {
    let mut dropped_ids: BTreeSet<u32> = flat.nodes[index].object_id.into_iter().collect();
    let mut keep: Vec<bool> = vec![true; flat.nodes.len()];
    keep[index] = false;
    // Children always come after their parent in the flat list.
    for (i, n) in flat.nodes.iter().enumerate().skip(index + 1) {
        if n.field_id.is_some_and(|p| dropped_ids.contains(&p)) {
            keep[i] = false;
            dropped_ids.extend(n.object_id);
        }
    }
    FlatQuery {
        operation: flat.operation,
        nodes: flat
            .nodes
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(n, _)| n.clone())
            .collect(),
    }
}

fn owner_type<'a>(
    flat: &'a FlatQuery,
    node: &'a GenNode,
    schema: &'a SchemaModel,
) -> Option<&'a str> {
    if let Some(on) = node.fragment_on.as_deref() {
        return Some(on);
    }
    match node.field_id {
        None => schema.root_type(flat.operation),
        Some(parent) => flat
            .nodes
            .iter()
            .find(|n| n.object_id == Some(parent))
            .map(|n| n.type_name.as_str()),
    }
}

fn arg_required(flat: &FlatQuery, node: &GenNode, arg: &str, schema: &SchemaModel) -> bool {
    owner_type(flat, node, schema)
        .and_then(|t| schema.object(t))
        .and_then(|o| o.field(&node.name))
        .and_then(|f| f.args.iter().find(|a| a.name == arg))
        .is_none_or(|a| a.required)
}

fn with_arg(flat: &FlatQuery, node: usize, arg: usize, value: Option<ArgValue>) -> FlatQuery {
    let mut next = flat.clone();
    match value {
        Some(v) => next.nodes[node].args[arg].1 = v,
        None => {
            next.nodes[node].args.remove(arg);
        }
    }
    next
}

fn halve(value: &ArgValue) -> Option<ArgValue> {
    match value {
        ArgValue::String(s) if !s.is_empty() => {
            let n = s.chars().count();
            Some(ArgValue::String(s.chars().take(n / 2).collect()))
        }
        ArgValue::Int(n) if *n != 0 => Some(ArgValue::Int(n / 2)),
        ArgValue::List(items) if !items.is_empty() => {
            Some(ArgValue::List(items[..items.len() / 2].to_vec()))
        }
        _ => None,
    }
}

fn arg_candidates(
    flat: &FlatQuery,
    node: usize,
    arg: usize,
    schema: &SchemaModel,
) -> Vec<FlatQuery> {
    let n = &flat.nodes[node];
    let (name, value) = &n.args[arg];
    let mut out = Vec::new();
    if !arg_required(flat, n, name, schema) {
        out.push(with_arg(flat, node, arg, None));
    }
    let minimal = value.minimal();
    if &minimal != value {
        out.push(with_arg(flat, node, arg, Some(minimal)));
    }
    if let Some(h) = halve(value) {
        out.push(with_arg(flat, node, arg, Some(h)));
    }
    out
}
