//! Query synthesis.
//!
//! Queries are generated iteratively as a flat list of [`GenNode`]s rather
//! than by depth-first recursion. Each object node gets a unique
//! `object_id`; its fields point back to it through `field_id`, and every
//! node records the generation (iteration) that produced it. Only nodes of
//! the previous generation are expanded, so cyclic schemas stay bounded by
//! the iteration count.
//!
//! The list is then cleaned of objects that never got a selection, folded
//! into a [`QueryTree`] and serialized to GraphQL text.

mod clean;
mod parse;
mod tree;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{gen_argument, GenContext, GenError, GeneratorRegistry};
use crate::schema::{valid_query_roots, FieldSpec, ObjectSpec, Operation, OutputKind, SchemaModel};
use crate::value::ArgValue;

pub use clean::clean_flat;
pub use parse::{parse_document, ParsedOperation};
pub use tree::{build_tree, envelope, serialize, QueryTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("schema has no query roots")]
    EmptySchema,
    #[error("node `{name}` references unknown object id {field_id}")]
    OrphanNode { name: String, field_id: u32 },
    #[error("flat list has {0} root nodes, expected exactly one")]
    RootCount(usize),
    #[error("field `{field}` has unknown type `{type_name}`")]
    UnknownType { field: String, type_name: String },
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error("cannot parse query: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Object,
    Scalar,
    Enum,
}

impl From<OutputKind> for NodeKind {
    fn from(kind: OutputKind) -> Self {
        match kind {
            OutputKind::Object => NodeKind::Object,
            OutputKind::Scalar => NodeKind::Scalar,
            OutputKind::Enum => NodeKind::Enum,
        }
    }
}

/// One generated query node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenNode {
    pub name: String,
    pub kind: NodeKind,
    pub type_name: String,
    /// Present iff `kind` is `Object`.
    pub object_id: Option<u32>,
    /// `object_id` of the containing node; absent for the root.
    pub field_id: Option<u32>,
    pub generation: u32,
    pub args: Vec<(String, ArgValue)>,
    /// Concrete type of the inline fragment this field sits in.
    pub fragment_on: Option<String>,
}

impl GenNode {
    pub fn is_object(&self) -> bool {
        self.kind == NodeKind::Object
    }
}

/// Output of [`generate_flat`]: the node list plus the operation type of
/// its root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatQuery {
    pub operation: Operation,
    pub nodes: Vec<GenNode>,
}

impl FlatQuery {
    pub fn cleaned(&self) -> FlatQuery {
        FlatQuery {
            operation: self.operation,
            nodes: clean_flat(&self.nodes),
        }
    }

    pub fn max_generation(&self) -> Option<u32> {
        self.nodes.iter().map(|n| n.generation).max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Upper bound on fields drawn per object per iteration.
    pub max_fields: u32,
    pub max_iterations: u32,
    pub size: u32,
    pub include_mutations: bool,
}

impl SynthesisConfig {
    pub fn iterations(&self) -> u32 {
        self.size.min(self.max_iterations)
    }
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            max_fields: 2,
            max_iterations: 10,
            size: 10,
            include_mutations: false,
        }
    }
}

/// A field that can be selected under a given parent, possibly inside an
/// inline fragment.
struct Candidate<'a> {
    owner: &'a str,
    field: &'a FieldSpec,
    fragment_on: Option<&'a str>,
}

/// Fields selectable under a node of type `spec`.
///
/// Interfaces offer their own fields directly plus the fields of one
/// concrete type (chosen uniformly) through an inline fragment; unions only
/// offer the fragment.
fn candidates<'a>(
    spec: &'a ObjectSpec,
    schema: &'a SchemaModel,
    ctx: &mut GenContext,
) -> Vec<Candidate<'a>> {
    let direct = spec.fields.iter().map(|field| Candidate {
        owner: &spec.name,
        field,
        fragment_on: None,
    });
    if !spec.is_abstract() {
        return direct.collect();
    }
    let mut out: Vec<Candidate<'a>> = direct.collect();
    let concrete: Vec<&ObjectSpec> = spec
        .possible_types
        .iter()
        .filter_map(|p| schema.object(p))
        .collect();
    if !concrete.is_empty() {
        let chosen = concrete[ctx.rng().gen_range(0..concrete.len())];
        out.extend(chosen.fields.iter().map(|field| Candidate {
            owner: &chosen.name,
            field,
            fragment_on: Some(&chosen.name),
        }));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn make_node(
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
    ctx: &mut GenContext,
    owner: &str,
    field: &FieldSpec,
    next_id: &mut u32,
    field_id: Option<u32>,
    generation: u32,
    fragment_on: Option<&str>,
) -> Result<GenNode, SynthesisError> {
    let type_name = field.ty.type_name().to_owned();
    let kind: NodeKind = schema
        .output_kind(&type_name)
        .ok_or_else(|| SynthesisError::UnknownType {
            field: format!("{owner}.{}", field.name),
            type_name: type_name.clone(),
        })?
        .into();
    let path = format!("{owner}.{}", field.name);
    let mut args = Vec::new();
    for arg in &field.args {
        if let Some(v) = gen_argument(arg, schema, registry, ctx, &path)? {
            args.push((arg.name.clone(), v));
        }
    }
    let object_id = (kind == NodeKind::Object).then(|| {
        let id = *next_id;
        *next_id += 1;
        id
    });
    Ok(GenNode {
        name: field.name.clone(),
        kind,
        type_name,
        object_id,
        field_id,
        generation,
        args,
        fragment_on: fragment_on.map(str::to_owned),
    })
}

/// Generate the flat node list of one query.
///
/// Generation 0 holds a single root field drawn uniformly from the valid
/// query roots. Each following iteration, up to `min(size, max_iterations)`,
/// expands every object node of the previous generation with between 1 and
/// `max_fields` distinct fields. Generation stops early once an iteration
/// produces no object nodes.
pub fn generate_flat(
    schema: &SchemaModel,
    cfg: &SynthesisConfig,
    registry: &GeneratorRegistry,
    ctx: &mut GenContext,
) -> Result<FlatQuery, SynthesisError> {
    let roots = valid_query_roots(schema, cfg.include_mutations)
        .map_err(|_| SynthesisError::EmptySchema)?;
    if roots.is_empty() {
        return Err(SynthesisError::EmptySchema);
    }
    let root = roots[ctx.rng().gen_range(0..roots.len())];
    let root_type = schema.root_type(root.operation).unwrap_or_default();

    let mut next_id = 0;
    let mut nodes = vec![make_node(
        schema,
        registry,
        ctx,
        root_type,
        root.field,
        &mut next_id,
        None,
        0,
        None,
    )?];
    let mut frontier_start = 0;

    for generation in 1..=cfg.iterations() {
        let frontier: Vec<(u32, String)> = nodes[frontier_start..]
            .iter()
            .filter_map(|n| n.object_id.map(|id| (id, n.type_name.clone())))
            .collect();
        if frontier.is_empty() {
            break;
        }
        frontier_start = nodes.len();
        for (parent_id, parent_type) in frontier {
            let Some(spec) = schema.object(&parent_type) else {
                continue;
            };
            if spec.is_abstract() {
                nodes.push(GenNode {
                    name: "__typename".to_owned(),
                    kind: NodeKind::Scalar,
                    type_name: "String".to_owned(),
                    object_id: None,
                    field_id: Some(parent_id),
                    generation,
                    args: Vec::new(),
                    fragment_on: None,
                });
            }
            let pool = candidates(spec, schema, ctx);
            if pool.is_empty() {
                continue;
            }
            let upper = (cfg.max_fields.max(1) as usize).min(pool.len());
            let count = ctx.rng().gen_range(1..=upper);
            let picks = index::sample(ctx.rng(), pool.len(), count);
            for i in picks.iter() {
                let c = &pool[i];
                nodes.push(make_node(
                    schema,
                    registry,
                    ctx,
                    c.owner,
                    c.field,
                    &mut next_id,
                    Some(parent_id),
                    generation,
                    c.fragment_on,
                )?);
            }
        }
    }
    Ok(FlatQuery {
        operation: root.operation,
        nodes,
    })
}
