//! Object/field tuple coverage of a schema.
//!
//! Every field of every object type is a `[Type, field]` tuple. A query
//! covers the tuples of the fields it selects; coverage is the share of the
//! schema's tuples covered so far.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::schema::{ObjectKind, Operation, SchemaModel};
use crate::synthesis::QueryTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverageError {
    #[error("cannot merge coverage over different universes")]
    UniverseMismatch,
    #[error("payload does not match the query at `{0}`")]
    PayloadShapeMismatch(String),
    #[error("invalid tuple `{0}` (expected Type.field)")]
    InvalidTuple(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoverageTuple {
    pub object_type: String,
    pub field: String,
}

impl CoverageTuple {
    pub fn new(object_type: impl Into<String>, field: impl Into<String>) -> Self {
        CoverageTuple {
            object_type: object_type.into(),
            field: field.into(),
        }
    }
}

impl fmt::Display for CoverageTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.object_type, self.field)
    }
}

impl std::str::FromStr for CoverageTuple {
    type Err = CoverageError;

    /// Accepts `Type.field` or `Type,field`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (t, f) = s
            .trim()
            .split_once(['.', ','])
            .ok_or_else(|| CoverageError::InvalidTuple(s.to_owned()))?;
        let (t, f) = (t.trim(), f.trim());
        if t.is_empty() || f.is_empty() {
            return Err(CoverageError::InvalidTuple(s.to_owned()));
        }
        Ok(CoverageTuple::new(t, f))
    }
}

/// Parse a filter list: one tuple per line, `#` comments and blank lines
/// ignored.
pub fn parse_filter_list(text: &str) -> Result<BTreeSet<CoverageTuple>, CoverageError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

fn is_meta(name: &str) -> bool {
    name.starts_with("__")
}

/// All `[Type, field]` tuples of object and interface types, minus
/// `filters`. Root operation types are included only with `include_roots`;
/// meta types and meta fields never are.
pub fn schema_tuples(
    schema: &SchemaModel,
    filters: &BTreeSet<CoverageTuple>,
    include_roots: bool,
) -> BTreeSet<CoverageTuple> {
    let is_root =
        |name: &str| name == schema.query_root || Some(name) == schema.mutation_root.as_deref();
    schema
        .objects
        .values()
        .filter(|o| o.kind != ObjectKind::Union && !is_meta(&o.name))
        .filter(|o| include_roots || !is_root(&o.name))
        .flat_map(|o| {
            o.fields
                .iter()
                .filter(|f| !is_meta(&f.name))
                .map(|f| CoverageTuple::new(&o.name, &f.name))
        })
        .filter(|t| !filters.contains(t))
        .collect()
}

/// Tuples selected by a query tree rooted at the `operation` root type.
pub fn query_tuples(
    tree: &QueryTree,
    operation: Operation,
    schema: &SchemaModel,
) -> BTreeSet<CoverageTuple> {
    let mut out = BTreeSet::new();
    if let Some(root) = schema.root_type(operation) {
        collect_query(tree, root, schema, &mut out);
    }
    out
}

fn collect_query(
    node: &QueryTree,
    parent_type: &str,
    schema: &SchemaModel,
    out: &mut BTreeSet<CoverageTuple>,
) {
    let owner = node.fragment_on.as_deref().unwrap_or(parent_type);
    if is_meta(&node.name) {
        return;
    }
    let Some(field) = schema.object(owner).and_then(|o| o.field(&node.name)) else {
        return;
    };
    out.insert(CoverageTuple::new(owner, &node.name));
    let child_type = field.ty.type_name();
    for child in &node.children {
        collect_query(child, child_type, schema, out);
    }
}

/// Tuples of fields that are present and non-null in a response `data`
/// payload for `tree`. The result is always a subset of
/// [`query_tuples`].
pub fn response_tuples(
    payload: &Value,
    tree: &QueryTree,
    operation: Operation,
    schema: &SchemaModel,
) -> Result<BTreeSet<CoverageTuple>, CoverageError> {
    let mut out = BTreeSet::new();
    let Some(root) = schema.root_type(operation) else {
        return Ok(out);
    };
    let obj = match payload {
        Value::Null => return Ok(out),
        Value::Object(obj) => obj,
        _ => return Err(CoverageError::PayloadShapeMismatch(String::new())),
    };
    for key in obj.keys() {
        if key != &tree.name {
            return Err(CoverageError::PayloadShapeMismatch(key.clone()));
        }
    }
    if let Some(value) = obj.get(&tree.name) {
        collect_response(value, tree, root, schema, &tree.name, &mut out)?;
    }
    Ok(out)
}

fn collect_response(
    value: &Value,
    node: &QueryTree,
    parent_type: &str,
    schema: &SchemaModel,
    path: &str,
    out: &mut BTreeSet<CoverageTuple>,
) -> Result<(), CoverageError> {
    if value.is_null() || is_meta(&node.name) {
        return Ok(());
    }
    let owner = node.fragment_on.as_deref().unwrap_or(parent_type);
    let Some(field) = schema.object(owner).and_then(|o| o.field(&node.name)) else {
        return Ok(());
    };
    out.insert(CoverageTuple::new(owner, &node.name));
    if node.children.is_empty() {
        return Ok(());
    }
    let child_type = field.ty.type_name();
    let items: Vec<&Value> = match value {
        Value::Array(items) => flatten(items),
        other => vec![other],
    };
    for item in items {
        let Value::Object(obj) = item else {
            if item.is_null() {
                continue;
            }
            return Err(CoverageError::PayloadShapeMismatch(path.to_owned()));
        };
        let typename = obj.get("__typename").and_then(Value::as_str);
        for (key, v) in obj {
            let child = node
                .children
                .iter()
                .filter(|c| &c.name == key)
                .find(|c| match (&c.fragment_on, typename) {
                    (Some(f), Some(t)) => f == t,
                    _ => true,
                })
                .ok_or_else(|| CoverageError::PayloadShapeMismatch(format!("{path}.{key}")))?;
            collect_response(v, child, child_type, schema, &format!("{path}.{key}"), out)?;
        }
    }
    Ok(())
}

fn flatten(items: &[Value]) -> Vec<&Value> {
    items
        .iter()
        .flat_map(|v| match v {
            Value::Array(inner) => flatten(inner),
            other => vec![other],
        })
        .collect()
}

/// Covered tuples against a fixed universe.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverageState {
    universe: BTreeSet<CoverageTuple>,
    covered: BTreeSet<CoverageTuple>,
    filters: BTreeSet<CoverageTuple>,
}

impl CoverageState {
    /// `filters` are removed from `universe`.
    pub fn new(universe: BTreeSet<CoverageTuple>, filters: BTreeSet<CoverageTuple>) -> Self {
        let universe = universe.difference(&filters).cloned().collect();
        CoverageState {
            universe,
            covered: BTreeSet::new(),
            filters,
        }
    }

    pub fn for_schema(
        schema: &SchemaModel,
        filters: BTreeSet<CoverageTuple>,
        include_roots: bool,
    ) -> Self {
        CoverageState::new(schema_tuples(schema, &filters, include_roots), filters)
    }

    /// Record tuples; those outside the universe are ignored.
    pub fn record<'a>(&mut self, tuples: impl IntoIterator<Item = &'a CoverageTuple>) {
        for t in tuples {
            if self.universe.contains(t) && !self.covered.contains(t) {
                self.covered.insert(t.clone());
            }
        }
    }

    pub fn universe(&self) -> &BTreeSet<CoverageTuple> {
        &self.universe
    }

    pub fn covered(&self) -> &BTreeSet<CoverageTuple> {
        &self.covered
    }

    pub fn filters(&self) -> &BTreeSet<CoverageTuple> {
        &self.filters
    }

    pub fn uncovered(&self) -> impl Iterator<Item = &CoverageTuple> {
        self.universe.difference(&self.covered)
    }

    /// `|covered| / |universe|`, or 1 for an empty universe.
    pub fn percent(&self) -> f64 {
        if self.universe.is_empty() {
            1.0
        } else {
            self.covered.len() as f64 / self.universe.len() as f64
        }
    }

    pub fn is_complete(&self) -> bool {
        self.covered.len() == self.universe.len()
    }

    pub fn merge(&self, other: &CoverageState) -> Result<CoverageState, CoverageError> {
        if self.universe != other.universe {
            return Err(CoverageError::UniverseMismatch);
        }
        Ok(CoverageState {
            universe: self.universe.clone(),
            covered: self.covered.union(&other.covered).cloned().collect(),
            filters: self.filters.clone(),
        })
    }

    /// An empty state over the same universe.
    pub fn empty_like(&self) -> CoverageState {
        CoverageState {
            universe: self.universe.clone(),
            covered: BTreeSet::new(),
            filters: self.filters.clone(),
        }
    }

    pub fn report(&self) -> CoverageReport {
        CoverageReport {
            universe_size: self.universe.len(),
            covered_size: self.covered.len(),
            percent: self.percent(),
            uncovered: self.uncovered().cloned().collect(),
        }
    }

    /// `object_type,field,covered` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("object_type,field,covered\n");
        for t in &self.universe {
            out.push_str(&format!(
                "{},{},{}\n",
                t.object_type,
                t.field,
                self.covered.contains(t)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub universe_size: usize,
    pub covered_size: usize,
    pub percent: f64,
    pub uncovered: Vec<CoverageTuple>,
}
