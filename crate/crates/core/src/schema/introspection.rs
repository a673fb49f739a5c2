use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use super::{
    ArgSpec, FieldSpec, ObjectKind, ObjectSpec, SchemaError, SchemaModel, TypeKind, TypeRef,
    BUILTIN_SCALARS,
};

/// The canonical introspection query sent to endpoints.
pub const INTROSPECTION_QUERY: &str = r#"query IntrospectionQuery {
  __schema {
    queryType { name }
    mutationType { name }
    subscriptionType { name }
    types { ...FullType }
  }
}

fragment FullType on __Type {
  kind
  name
  description
  fields(includeDeprecated: true) {
    name
    description
    args { ...InputValue }
    type { ...TypeRef }
    isDeprecated
    deprecationReason
  }
  inputFields { ...InputValue }
  interfaces { ...TypeRef }
  enumValues(includeDeprecated: true) {
    name
    description
    isDeprecated
    deprecationReason
  }
  possibleTypes { ...TypeRef }
}

fragment InputValue on __InputValue {
  name
  description
  type { ...TypeRef }
  defaultValue
}

fragment TypeRef on __Type {
  kind
  name
  ofType {
    kind
    name
    ofType {
      kind
      name
      ofType {
        kind
        name
        ofType {
          kind
          name
          ofType {
            kind
            name
            ofType {
              kind
              name
              ofType { kind name }
            }
          }
        }
      }
    }
  }
}
"#;

fn malformed(msg: impl Into<String>) -> SchemaError {
    SchemaError::MalformedIntrospection(msg.into())
}

fn parse_kind(v: &Value, ctx: &str) -> Result<TypeKind, SchemaError> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed(format!("{ctx}: missing type kind")))?;
    serde_json::from_value(Value::String(kind.to_owned()))
        .map_err(|_| malformed(format!("{ctx}: unknown type kind `{kind}`")))
}

fn parse_type_ref(v: &Value, ctx: &str) -> Result<TypeRef, SchemaError> {
    let kind = parse_kind(v, ctx)?;
    if kind.is_wrapper() {
        let inner = v
            .get("ofType")
            .filter(|t| !t.is_null())
            .ok_or_else(|| malformed(format!("{ctx}: {kind:?} without ofType")))?;
        let inner = parse_type_ref(inner, ctx)?;
        if kind == TypeKind::NonNull && inner.kind == TypeKind::NonNull {
            return Err(malformed(format!("{ctx}: NON_NULL wraps NON_NULL")));
        }
        Ok(TypeRef {
            kind,
            name: None,
            of_type: Some(Box::new(inner)),
        })
    } else {
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| malformed(format!("{ctx}: named type without name")))?;
        Ok(TypeRef::named(kind, name))
    }
}

fn parse_input_values(list: Option<&Value>, ctx: &str) -> Result<Vec<ArgSpec>, SchemaError> {
    let Some(items) = list.and_then(Value::as_array) else {
        return Ok(Vec::new());
    };
    items
        .iter()
        .map(|a| {
            let name = a
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| malformed(format!("{ctx}: argument without name")))?;
            let ty_json = a
                .get("type")
                .ok_or_else(|| malformed(format!("{ctx}.{name}: argument without type")))?;
            let ty = parse_type_ref(ty_json, &format!("{ctx}.{name}"))?;
            Ok(ArgSpec {
                name: name.to_owned(),
                required: ty.is_non_null(),
                default_present: a.get("defaultValue").is_some_and(|d| !d.is_null()),
                ty,
            })
        })
        .collect()
}

fn type_names(list: Option<&Value>) -> Vec<String> {
    list.and_then(Value::as_array)
        .map(|items| {
            items
                .iter()
                .filter_map(|t| t.get("name").and_then(Value::as_str).map(str::to_owned))
                .collect()
        })
        .unwrap_or_default()
}

/// Parse a standard introspection result.
///
/// Accepts `{"data": {"__schema": ..}}`, `{"__schema": ..}` or the bare
/// schema object.
pub fn parse_introspection(doc: &Value) -> Result<SchemaModel, SchemaError> {
    let schema = doc
        .get("data")
        .and_then(|d| d.get("__schema"))
        .or_else(|| doc.get("__schema"))
        .or_else(|| doc.get("types").map(|_| doc))
        .ok_or_else(|| malformed("missing `__schema`"))?;
    let types = schema
        .get("types")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("`__schema.types` is not a list"))?;

    let mut model = SchemaModel::default();
    for t in types {
        let name = t
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| malformed("type without name"))?
            .to_owned();
        let kind = parse_kind(t, &name)?;
        match kind {
            TypeKind::Scalar => {
                model.scalars.insert(name);
            }
            TypeKind::Enum => {
                let values = t
                    .get("enumValues")
                    .and_then(Value::as_array)
                    .map(|vs| {
                        vs.iter()
                            .filter_map(|v| v.get("name").and_then(Value::as_str))
                            .map(str::to_owned)
                            .collect()
                    })
                    .unwrap_or_default();
                model.enums.insert(name, values);
            }
            TypeKind::InputObject => {
                let fields = parse_input_values(t.get("inputFields"), &name)?;
                model.input_objects.insert(name, fields);
            }
            TypeKind::Object | TypeKind::Interface | TypeKind::Union => {
                let obj_kind = match kind {
                    TypeKind::Object => ObjectKind::Object,
                    TypeKind::Interface => ObjectKind::Interface,
                    _ => ObjectKind::Union,
                };
                let mut fields = Vec::new();
                let mut seen = BTreeSet::new();
                for f in t
                    .get("fields")
                    .and_then(Value::as_array)
                    .into_iter()
                    .flatten()
                {
                    let fname = f
                        .get("name")
                        .and_then(Value::as_str)
                        .filter(|n| !n.is_empty())
                        .ok_or_else(|| malformed(format!("{name}: field without name")))?;
                    if !seen.insert(fname.to_owned()) {
                        return Err(malformed(format!("{name}: duplicate field `{fname}`")));
                    }
                    let ctx = format!("{name}.{fname}");
                    let ty = parse_type_ref(
                        f.get("type")
                            .ok_or_else(|| malformed(format!("{ctx}: field without type")))?,
                        &ctx,
                    )?;
                    fields.push(FieldSpec {
                        name: fname.to_owned(),
                        ty,
                        args: parse_input_values(f.get("args"), &ctx)?,
                    });
                }
                let possible_types = if obj_kind == ObjectKind::Object {
                    Vec::new()
                } else {
                    type_names(t.get("possibleTypes"))
                };
                model.objects.insert(
                    name.clone(),
                    ObjectSpec {
                        name,
                        kind: obj_kind,
                        fields,
                        possible_types,
                    },
                );
            }
            TypeKind::List | TypeKind::NonNull => {
                return Err(malformed(format!("{name}: wrapper kind in type list")))
            }
        }
    }

    model.query_root = match schema.get("queryType").and_then(|q| q.get("name")) {
        Some(Value::String(n)) => n.clone(),
        _ if model.objects.contains_key("Query") => "Query".to_owned(),
        _ => return Err(malformed("missing `queryType`")),
    };
    model.mutation_root = schema
        .get("mutationType")
        .and_then(|m| m.get("name"))
        .and_then(Value::as_str)
        .map(str::to_owned);

    check_closure(&mut model)?;
    Ok(model)
}

// Every referenced name must resolve. Built-in scalars are added on first
// reference when the document omitted them.
fn check_closure(model: &mut SchemaModel) -> Result<(), SchemaError> {
    let mut referenced: Vec<(String, String)> = Vec::new();
    for root in std::iter::once(&model.query_root).chain(model.mutation_root.as_ref()) {
        referenced.push(("schema".to_owned(), root.clone()));
    }
    for obj in model.objects.values() {
        for f in &obj.fields {
            referenced.push((obj.name.clone(), f.ty.type_name().to_owned()));
            for a in &f.args {
                referenced.push((obj.name.clone(), a.ty.type_name().to_owned()));
            }
        }
        for p in &obj.possible_types {
            referenced.push((obj.name.clone(), p.clone()));
        }
    }
    for (name, fields) in &model.input_objects {
        for a in fields {
            referenced.push((name.clone(), a.ty.type_name().to_owned()));
        }
    }

    let builtins: BTreeMap<&str, ()> = BUILTIN_SCALARS.iter().map(|s| (*s, ())).collect();
    for (owner, name) in referenced {
        if model.knows_type(&name) {
            if builtins.contains_key(name.as_str()) {
                model.scalars.insert(name);
            }
            continue;
        }
        return Err(SchemaError::DanglingTypeReference { owner, name });
    }
    for root in std::iter::once(&model.query_root).chain(model.mutation_root.as_ref()) {
        if !model.objects.contains_key(root) {
            return Err(SchemaError::DanglingTypeReference {
                owner: "schema".to_owned(),
                name: root.clone(),
            });
        }
    }
    Ok(())
}
