//! Response specifications derived from a schema, and payload validation.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{ObjectKind, SchemaModel, TypeKind, TypeRef};
use crate::synthesis::QueryTree;

/// Expected JSON shape of one response field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Shape {
    Scalar(String),
    Enum(String),
    Object(String),
    List(Box<Shape>),
    NonNull(Box<Shape>),
}

impl Shape {
    fn from_type_ref(ty: &TypeRef, schema: &SchemaModel) -> Shape {
        match ty.kind {
            TypeKind::NonNull => Shape::NonNull(Box::new(Shape::from_type_ref(
                ty.of_type.as_deref().expect("NON_NULL without ofType"),
                schema,
            ))),
            TypeKind::List => Shape::List(Box::new(Shape::from_type_ref(
                ty.of_type.as_deref().expect("LIST without ofType"),
                schema,
            ))),
            _ => {
                let name = ty.type_name().to_owned();
                if schema.objects.contains_key(&name) {
                    Shape::Object(name)
                } else if schema.enums.contains_key(&name) {
                    Shape::Enum(name)
                } else {
                    Shape::Scalar(name)
                }
            }
        }
    }

    fn typename() -> Shape {
        Shape::NonNull(Box::new(Shape::Scalar("String".to_owned())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseSpec {
    pub name: String,
    pub kind: ObjectKind,
    pub fields: BTreeMap<String, Shape>,
    pub possible_types: Vec<String>,
}

/// Validation knobs. The default is lenient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Strictness {
    /// `ID` values must be JSON strings (otherwise integers are accepted too).
    pub strict_ids: bool,
    /// Custom scalars must be JSON strings (otherwise any non-null scalar).
    pub strict_custom_scalars: bool,
    /// Every requested field must be present in the payload.
    pub require_requested: bool,
}

impl Strictness {
    pub fn strict() -> Self {
        Strictness {
            strict_ids: true,
            strict_custom_scalars: true,
            require_requested: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn violation(path: &str, message: impl Into<String>) -> Violation {
    Violation {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_owned()
    } else {
        format!("{path}.{key}")
    }
}

/// One [`ResponseSpec`] per object, interface and union type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseSpecs {
    specs: BTreeMap<String, ResponseSpec>,
    enums: BTreeMap<String, Vec<String>>,
}

pub fn derive_response_specs(schema: &SchemaModel) -> ResponseSpecs {
    let specs = schema
        .objects
        .values()
        .map(|obj| {
            let fields = obj
                .fields
                .iter()
                .map(|f| (f.name.clone(), Shape::from_type_ref(&f.ty, schema)))
                .collect();
            (
                obj.name.clone(),
                ResponseSpec {
                    name: obj.name.clone(),
                    kind: obj.kind,
                    fields,
                    possible_types: obj.possible_types.clone(),
                },
            )
        })
        .collect();
    ResponseSpecs {
        specs,
        enums: schema.enums.clone(),
    }
}

impl ResponseSpecs {
    pub fn get(&self, type_name: &str) -> Option<&ResponseSpec> {
        self.specs.get(type_name)
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ResponseSpec)> {
        self.specs.iter()
    }

    /// The concrete type named by `__typename`, when it is one of the
    /// possible types of `spec` (or `spec` itself).
    fn concrete_type<'a>(
        &'a self,
        spec: &'a ResponseSpec,
        obj: &Map<String, Value>,
    ) -> Option<&'a ResponseSpec> {
        let tn = obj.get("__typename").and_then(Value::as_str)?;
        if tn == spec.name || spec.possible_types.iter().any(|p| p == tn) {
            self.specs.get(tn)
        } else {
            None
        }
    }

    /// Field shape on `spec`, looking through possible types for abstract
    /// types.
    fn field_shape(
        &self,
        spec: &ResponseSpec,
        concrete: Option<&ResponseSpec>,
        key: &str,
    ) -> Option<Shape> {
        if key == "__typename" {
            return Some(Shape::typename());
        }
        if let Some(shape) = concrete.and_then(|c| c.fields.get(key)) {
            return Some(shape.clone());
        }
        if let Some(shape) = spec.fields.get(key) {
            return Some(shape.clone());
        }
        if concrete.is_none() && spec.kind != ObjectKind::Object {
            return spec
                .possible_types
                .iter()
                .filter_map(|p| self.specs.get(p))
                .find_map(|p| p.fields.get(key).cloned());
        }
        None
    }

    /// Check `value` against the spec of `type_name` without reference to a
    /// query: keys must be fields of the type and every value must match its
    /// declared type.
    pub fn validate(
        &self,
        type_name: &str,
        value: &Value,
        path: &str,
        strictness: Strictness,
    ) -> Result<(), Violation> {
        self.check_shape(
            &Shape::Object(type_name.to_owned()),
            value,
            path,
            None,
            strictness,
        )
    }

    /// Check the `data` section of a response against the selection in
    /// `tree`, whose root field lives on `root_type`.
    ///
    /// The payload may only contain requested fields and each value must
    /// match its declared type. Requested-but-absent fields are accepted
    /// unless `require_requested` is set.
    pub fn validate_selection(
        &self,
        root_type: &str,
        tree: &QueryTree,
        data: &Value,
        strictness: Strictness,
    ) -> Result<(), Violation> {
        let root_spec = self
            .specs
            .get(root_type)
            .ok_or_else(|| violation("", format!("unknown root type `{root_type}`")))?;
        let Value::Object(obj) = data else {
            return Err(violation("", "`data` is not an object"));
        };
        for (key, value) in obj {
            if key != &tree.name {
                return Err(violation(key, "field was not requested"));
            }
            let shape = root_spec
                .fields
                .get(key)
                .ok_or_else(|| violation(key, format!("`{root_type}` has no field `{key}`")))?;
            self.check_shape(shape, value, key, Some(&tree.children), strictness)?;
        }
        if strictness.require_requested && !obj.contains_key(&tree.name) {
            return Err(violation(&tree.name, "requested field missing"));
        }
        Ok(())
    }

    fn check_shape(
        &self,
        shape: &Shape,
        value: &Value,
        path: &str,
        selection: Option<&[QueryTree]>,
        strictness: Strictness,
    ) -> Result<(), Violation> {
        match shape {
            Shape::NonNull(inner) => {
                if value.is_null() {
                    Err(violation(path, "null for non-null field"))
                } else {
                    self.check_shape(inner, value, path, selection, strictness)
                }
            }
            _ if value.is_null() => Ok(()),
            Shape::List(inner) => {
                let Value::Array(items) = value else {
                    return Err(violation(
                        path,
                        format!("expected list, got {}", json_kind(value)),
                    ));
                };
                items.iter().enumerate().try_for_each(|(i, item)| {
                    self.check_shape(inner, item, &format!("{path}[{i}]"), selection, strictness)
                })
            }
            Shape::Scalar(name) => check_scalar(name, value, path, strictness),
            Shape::Enum(name) => {
                let values = self.enums.get(name).map(Vec::as_slice).unwrap_or_default();
                match value.as_str() {
                    Some(s) if values.iter().any(|v| v == s) => Ok(()),
                    _ => Err(violation(
                        path,
                        format!("{value} is not a value of enum `{name}`"),
                    )),
                }
            }
            Shape::Object(type_name) => {
                let Value::Object(obj) = value else {
                    return Err(violation(
                        path,
                        format!("expected object `{type_name}`, got {}", json_kind(value)),
                    ));
                };
                let spec = self
                    .specs
                    .get(type_name)
                    .ok_or_else(|| violation(path, format!("unknown type `{type_name}`")))?;
                match selection {
                    None => self.check_object(spec, obj, path, strictness),
                    Some(children) => {
                        self.check_selected_object(spec, obj, children, path, strictness)
                    }
                }
            }
        }
    }

    fn check_object(
        &self,
        spec: &ResponseSpec,
        obj: &Map<String, Value>,
        path: &str,
        strictness: Strictness,
    ) -> Result<(), Violation> {
        let concrete = self.concrete_type(spec, obj);
        for (key, value) in obj {
            let child_path = join(path, key);
            let shape = self.field_shape(spec, concrete, key).ok_or_else(|| {
                violation(&child_path, format!("`{}` has no field `{key}`", spec.name))
            })?;
            self.check_shape(&shape, value, &child_path, None, strictness)?;
        }
        Ok(())
    }

    fn check_selected_object(
        &self,
        spec: &ResponseSpec,
        obj: &Map<String, Value>,
        children: &[QueryTree],
        path: &str,
        strictness: Strictness,
    ) -> Result<(), Violation> {
        let concrete = self.concrete_type(spec, obj);
        // A child under `... on T` applies only when the object is a T, or
        // when the concrete type is unknown.
        let applies = |child: &QueryTree| match (&child.fragment_on, concrete) {
            (None, _) => true,
            (Some(frag), Some(c)) => frag == &c.name,
            (Some(_), None) => true,
        };
        for (key, value) in obj {
            let child_path = join(path, key);
            let Some(child) = children.iter().find(|c| &c.name == key && applies(c)) else {
                return Err(violation(&child_path, "field was not requested"));
            };
            let declaring = child
                .fragment_on
                .as_deref()
                .and_then(|f| self.specs.get(f))
                .unwrap_or(spec);
            let shape = self.field_shape(declaring, concrete, key).ok_or_else(|| {
                violation(
                    &child_path,
                    format!("`{}` has no field `{key}`", declaring.name),
                )
            })?;
            self.check_shape(
                &shape,
                value,
                &child_path,
                Some(&child.children),
                strictness,
            )?;
        }
        if strictness.require_requested {
            let known_concrete = concrete.is_some() || spec.kind == ObjectKind::Object;
            for child in children {
                let must_appear = child.fragment_on.is_none() || (known_concrete && applies(child));
                if must_appear && !obj.contains_key(&child.name) {
                    return Err(violation(
                        &join(path, &child.name),
                        "requested field missing",
                    ));
                }
            }
        }
        Ok(())
    }
}

fn json_kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "list",
        Value::Object(_) => "object",
    }
}

fn check_scalar(
    name: &str,
    value: &Value,
    path: &str,
    strictness: Strictness,
) -> Result<(), Violation> {
    let ok = match name {
        "String" => value.is_string(),
        "Int" => value.is_i64() || value.is_u64(),
        "Float" => value.is_number(),
        "Boolean" => value.is_boolean(),
        "ID" if strictness.strict_ids => value.is_string(),
        "ID" => value.is_string() || value.is_i64() || value.is_u64(),
        _ if strictness.strict_custom_scalars => value.is_string(),
        _ => !matches!(value, Value::Array(_) | Value::Object(_)),
    };
    if ok {
        Ok(())
    } else {
        Err(violation(
            path,
            format!("expected {name}, got {} {value}", json_kind(value)),
        ))
    }
}
