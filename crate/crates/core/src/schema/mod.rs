//! Typed view of a GraphQL schema, built from introspection JSON.

mod introspection;
mod response;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use introspection::{parse_introspection, INTROSPECTION_QUERY};
pub use response::{
    derive_response_specs, ResponseSpec, ResponseSpecs, Shape, Strictness, Violation,
};

/// The built-in scalar names. They are accepted even when an introspection
/// document omits them from its type list.
pub const BUILTIN_SCALARS: [&str; 5] = ["Int", "Float", "String", "Boolean", "ID"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("malformed introspection document: {0}")]
    MalformedIntrospection(String),
    #[error("type `{owner}` references unknown type `{name}`")]
    DanglingTypeReference { owner: String, name: String },
    #[error("schema has no query root")]
    NoQueryRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TypeKind {
    Scalar,
    Object,
    Enum,
    InputObject,
    Interface,
    Union,
    List,
    NonNull,
}

impl TypeKind {
    pub fn is_wrapper(self) -> bool {
        matches!(self, TypeKind::List | TypeKind::NonNull)
    }
}

/// A (possibly wrapped) reference to a named type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeRef {
    pub kind: TypeKind,
    pub name: Option<String>,
    pub of_type: Option<Box<TypeRef>>,
}

impl TypeRef {
    pub fn named(kind: TypeKind, name: impl Into<String>) -> Self {
        debug_assert!(!kind.is_wrapper());
        TypeRef {
            kind,
            name: Some(name.into()),
            of_type: None,
        }
    }

    pub fn list(inner: TypeRef) -> Self {
        TypeRef {
            kind: TypeKind::List,
            name: None,
            of_type: Some(Box::new(inner)),
        }
    }

    pub fn non_null(inner: TypeRef) -> Self {
        debug_assert!(inner.kind != TypeKind::NonNull);
        TypeRef {
            kind: TypeKind::NonNull,
            name: None,
            of_type: Some(Box::new(inner)),
        }
    }

    pub fn is_non_null(&self) -> bool {
        self.kind == TypeKind::NonNull
    }

    /// The innermost named type.
    pub fn named_type(&self) -> &TypeRef {
        match &self.of_type {
            Some(inner) if self.kind.is_wrapper() => inner.named_type(),
            _ => self,
        }
    }

    pub fn type_name(&self) -> &str {
        self.named_type().name.as_deref().unwrap_or_default()
    }

    /// GraphQL notation, e.g. `[User!]!`.
    pub fn display(&self) -> String {
        match self.kind {
            TypeKind::NonNull => format!("{}!", self.inner().display()),
            TypeKind::List => format!("[{}]", self.inner().display()),
            _ => self.name.clone().unwrap_or_default(),
        }
    }

    fn inner(&self) -> &TypeRef {
        self.of_type
            .as_deref()
            .expect("wrapper type without of_type")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    pub required: bool,
    pub default_present: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    pub args: Vec<ArgSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ObjectKind {
    Object,
    Interface,
    Union,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub kind: ObjectKind,
    pub fields: Vec<FieldSpec>,
    pub possible_types: Vec<String>,
}

impl ObjectSpec {
    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn is_abstract(&self) -> bool {
        self.kind != ObjectKind::Object
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Query,
    Mutation,
}

impl Operation {
    pub fn keyword(self) -> &'static str {
        match self {
            Operation::Query => "query",
            Operation::Mutation => "mutation",
        }
    }
}

/// One field a query may start from.
#[derive(Debug, Clone, Copy)]
pub struct RootField<'a> {
    pub operation: Operation,
    pub field: &'a FieldSpec,
}

/// Output-type kind of a named type, as far as query generation cares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Object,
    Scalar,
    Enum,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SchemaModel {
    pub query_root: String,
    pub mutation_root: Option<String>,
    pub objects: BTreeMap<String, ObjectSpec>,
    pub scalars: BTreeSet<String>,
    pub enums: BTreeMap<String, Vec<String>>,
    pub input_objects: BTreeMap<String, Vec<ArgSpec>>,
}

impl SchemaModel {
    pub fn object(&self, name: &str) -> Option<&ObjectSpec> {
        self.objects.get(name)
    }

    pub fn root_type(&self, op: Operation) -> Option<&str> {
        match op {
            Operation::Query => Some(self.query_root.as_str()),
            Operation::Mutation => self.mutation_root.as_deref(),
        }
    }

    pub fn output_kind(&self, type_name: &str) -> Option<OutputKind> {
        if self.objects.contains_key(type_name) {
            Some(OutputKind::Object)
        } else if self.enums.contains_key(type_name) {
            Some(OutputKind::Enum)
        } else if self.scalars.contains(type_name) || BUILTIN_SCALARS.contains(&type_name) {
            Some(OutputKind::Scalar)
        } else {
            None
        }
    }

    pub fn is_meta_type(name: &str) -> bool {
        name.starts_with("__")
    }

    /// Every type name that is reachable from the root operation types
    /// through output fields and argument types.
    pub fn reachable_types(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<String> = std::iter::once(self.query_root.clone())
            .chain(self.mutation_root.clone())
            .collect();
        while let Some(name) = stack.pop() {
            if !seen.insert(name.clone()) {
                continue;
            }
            let mut push = |ty: &TypeRef| stack.push(ty.type_name().to_owned());
            if let Some(obj) = self.objects.get(&name) {
                for f in &obj.fields {
                    push(&f.ty);
                    f.args.iter().for_each(|a| push(&a.ty));
                }
                stack.extend(obj.possible_types.iter().cloned());
            } else if let Some(fields) = self.input_objects.get(&name) {
                fields.iter().for_each(|a| push(&a.ty));
            }
        }
        seen
    }

    /// True when `name` resolves to some type in the model.
    pub fn knows_type(&self, name: &str) -> bool {
        self.output_kind(name).is_some() || self.input_objects.contains_key(name)
    }
}

/// The fields a generated query may start from.
///
/// Query-root fields always; mutation-root fields only when
/// `include_mutations` is set.
pub fn valid_query_roots(
    schema: &SchemaModel,
    include_mutations: bool,
) -> Result<Vec<RootField<'_>>, SchemaError> {
    let query = schema
        .object(&schema.query_root)
        .ok_or(SchemaError::NoQueryRoot)?;
    let mut roots: Vec<RootField<'_>> = query
        .fields
        .iter()
        .filter(|f| !SchemaModel::is_meta_type(&f.name))
        .map(|field| RootField {
            operation: Operation::Query,
            field,
        })
        .collect();
    if include_mutations {
        if let Some(mutation) = schema
            .mutation_root
            .as_deref()
            .and_then(|m| schema.object(m))
        {
            roots.extend(mutation.fields.iter().map(|field| RootField {
                operation: Operation::Mutation,
                field,
            }));
        }
    }
    Ok(roots)
}
