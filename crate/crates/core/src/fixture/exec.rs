use serde_json::{json, Map, Value};

use super::data::{project_index, projects_of, user_index, PROJECTS, USERS};
use super::schema::{fixture_schema, introspection};
use super::{FaultId, Fixture, FixtureResponse, Resolver, Target};
use crate::schema::{Operation, TypeKind, TypeRef};
use crate::synthesis::{parse_document, QueryTree};
use crate::value::ArgValue;

/// Resolver output before completion against the declared type.
#[derive(Debug, Clone)]
enum Out {
    Null,
    Str(String),
    Int(i64),
    Bool(bool),
    Project(usize),
    User(usize),
    List(Vec<Out>),
}

#[derive(Debug, Clone, Copy)]
enum Parent {
    Root(Operation),
    Project(usize),
    User(usize),
}

struct Crash(String);

pub(super) fn execute(fixture: &Fixture, query: &str) -> FixtureResponse {
    let parsed = match parse_document(query) {
        Ok(p) => p,
        Err(e) => return FixtureResponse::error(400, e.to_string()),
    };
    let schema = fixture_schema();
    let root_type = schema
        .root_type(parsed.operation)
        .expect("fixture has both root types")
        .to_owned();
    if let Err(msg) = validate(&parsed.roots, &root_type, true) {
        return FixtureResponse::error(400, msg);
    }

    let mut errors = Vec::new();
    let mut data = Map::new();
    let mut path = Vec::new();
    for root in &parsed.roots {
        if data.contains_key(&root.name) {
            continue;
        }
        let value = match root.name.as_str() {
            "__typename" => Value::String(root_type.clone()),
            "__schema" => introspection()["__schema"].clone(),
            "__type" => introspect_type(root),
            _ => {
                let field = schema
                    .object(&root_type)
                    .and_then(|o| o.field(&root.name))
                    .expect("validated");
                let out = match resolve(fixture, Parent::Root(parsed.operation), root) {
                    Ok(out) => out,
                    Err(Crash(msg)) => {
                        return FixtureResponse::error(500, format!("internal server error: {msg}"))
                    }
                };
                path.push(json!(root.name));
                let done = complete(fixture, out, &field.ty, root, &mut path, &mut errors);
                path.pop();
                match done {
                    Ok(v) => v.unwrap_or(Value::Null),
                    Err(Crash(msg)) => {
                        return FixtureResponse::error(500, format!("internal server error: {msg}"))
                    }
                }
            }
        };
        data.insert(root.name.clone(), value);
    }
    let mut body = json!({ "data": data });
    if !errors.is_empty() {
        body["errors"] = Value::Array(errors);
    }
    FixtureResponse { status: 200, body }
}

fn introspect_type(node: &QueryTree) -> Value {
    let name = node
        .args
        .iter()
        .find(|(k, _)| k == "name")
        .and_then(|(_, v)| match v {
            ArgValue::String(s) => Some(s.as_str()),
            _ => None,
        });
    introspection()["__schema"]["types"]
        .as_array()
        .and_then(|types| types.iter().find(|t| t["name"].as_str() == name))
        .cloned()
        .unwrap_or(Value::Null)
}

fn validate(nodes: &[QueryTree], parent_type: &str, at_root: bool) -> Result<(), String> {
    let schema = fixture_schema();
    for node in nodes {
        if let Some(on) = &node.fragment_on {
            if on != parent_type {
                return Err(format!(
                    "fragment on `{on}` cannot apply inside `{parent_type}`"
                ));
            }
        }
        if node.name == "__typename" {
            if !node.args.is_empty() || !node.children.is_empty() {
                return Err("`__typename` takes no arguments or selection".to_owned());
            }
            continue;
        }
        if at_root && (node.name == "__schema" || node.name == "__type") {
            continue;
        }
        let field = schema
            .object(parent_type)
            .and_then(|o| o.field(&node.name))
            .ok_or_else(|| format!("`{parent_type}` has no field `{}`", node.name))?;
        for (i, (name, value)) in node.args.iter().enumerate() {
            if node.args[..i].iter().any(|(n, _)| n == name) {
                return Err(format!("duplicate argument `{name}`"));
            }
            let spec = field.args.iter().find(|a| &a.name == name).ok_or_else(|| {
                format!("`{parent_type}.{}` has no argument `{name}`", field.name)
            })?;
            if !fits(&spec.ty, value) {
                return Err(format!("argument `{name}` expects {}", spec.ty.display()));
            }
        }
        if let Some(missing) = field
            .args
            .iter()
            .find(|a| a.required && !node.args.iter().any(|(n, _)| n == &a.name))
        {
            return Err(format!("missing required argument `{}`", missing.name));
        }
        let child_type = field.ty.type_name();
        let is_object = schema.object(child_type).is_some();
        match (is_object, node.children.is_empty()) {
            (true, true) => return Err(format!("field `{}` needs a selection", node.name)),
            (false, false) => return Err(format!("field `{}` cannot have a selection", node.name)),
            _ => {}
        }
        validate(&node.children, child_type, false)?;
    }
    Ok(())
}

fn fits(ty: &TypeRef, value: &ArgValue) -> bool {
    match (ty.kind, value) {
        (TypeKind::NonNull, ArgValue::Null) => false,
        (TypeKind::NonNull, v) => ty.of_type.as_deref().is_some_and(|inner| fits(inner, v)),
        (_, ArgValue::Null) => true,
        (TypeKind::List, ArgValue::List(items)) => {
            let inner = ty.of_type.as_deref();
            items.iter().all(|v| inner.is_some_and(|t| fits(t, v)))
        }
        (TypeKind::List, v) => ty.of_type.as_deref().is_some_and(|inner| fits(inner, v)),
        _ => matches!(
            (ty.name.as_deref(), value),
            (Some("String"), ArgValue::String(_))
                | (Some("ID"), ArgValue::String(_) | ArgValue::Int(_))
                | (Some("Int"), ArgValue::Int(_))
                | (Some("Float"), ArgValue::Int(_) | ArgValue::Float(_))
                | (Some("Boolean"), ArgValue::Boolean(_))
        ),
    }
}

fn arg_string(node: &QueryTree, name: &str) -> Option<String> {
    node.args
        .iter()
        .find(|(k, _)| k == name)
        .and_then(|(_, v)| match v {
            ArgValue::String(s) => Some(s.clone()),
            ArgValue::Int(n) => Some(n.to_string()),
            _ => None,
        })
}

fn users(ids: &[&str]) -> Vec<Out> {
    ids.iter()
        .filter_map(|id| user_index(id))
        .map(Out::User)
        .collect()
}

fn resolve(fx: &Fixture, parent: Parent, node: &QueryTree) -> Result<Out, Crash> {
    Ok(match (parent, node.name.as_str()) {
        (Parent::Root(Operation::Query), "project") => {
            fx.hit(Resolver::Project);
            let id = arg_string(node, "id").unwrap_or_default();
            if fx.has(FaultId::InputValidation1) && !id.chars().all(|c| c.is_ascii_digit()) {
                return Err(Crash("project id is not numeric".into()));
            }
            if fx.has(FaultId::InputValidation2) && !id.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(Crash("project id has an unexpected character".into()));
            }
            if fx.has(FaultId::InputValidation3) && id.chars().count() > 64 {
                return Err(Crash("project id buffer overflow".into()));
            }
            if fx.has(FaultId::Logic(Target::Project)) {
                return Err(Crash("project resolver failed".into()));
            }
            if fx.has(FaultId::WrongType(Target::Project)) {
                Out::List(project_index(&id).map(Out::Project).into_iter().collect())
            } else if fx.has(FaultId::WrongField(Target::Project)) {
                PROJECTS
                    .iter()
                    .position(|p| p.name == id)
                    .map_or(Out::Null, Out::Project)
            } else {
                project_index(&id).map_or(Out::Null, Out::Project)
            }
        }
        (Parent::Root(Operation::Query), "projects") => {
            fx.hit(Resolver::Projects);
            let owner = arg_string(node, "ownerId").unwrap_or_default();
            Out::List(
                (0..PROJECTS.len())
                    .filter(|&i| PROJECTS[i].owner == owner)
                    .map(Out::Project)
                    .collect(),
            )
        }
        (Parent::Root(Operation::Query), "user") => {
            fx.hit(Resolver::User);
            let id = arg_string(node, "id").unwrap_or_default();
            if fx.has(FaultId::Logic(Target::User)) {
                return Err(Crash("user resolver failed".into()));
            }
            if fx.has(FaultId::WrongType(Target::User)) {
                Out::List(user_index(&id).map(Out::User).into_iter().collect())
            } else if fx.has(FaultId::WrongField(Target::User)) {
                USERS
                    .iter()
                    .position(|u| u.name == id)
                    .map_or(Out::Null, Out::User)
            } else {
                user_index(&id).map_or(Out::Null, Out::User)
            }
        }
        (Parent::Root(Operation::Query), "users") => {
            fx.hit(Resolver::Users);
            let project = arg_string(node, "projectId").unwrap_or_default();
            match project_index(&project) {
                Some(p) => Out::List(users(PROJECTS[p].members)),
                None => Out::List(Vec::new()),
            }
        }
        (Parent::Root(Operation::Mutation), "touch") => {
            fx.hit(Resolver::Touch);
            Out::Bool(true)
        }
        (Parent::Project(p), field) => {
            let row = &PROJECTS[p];
            match field {
                "id" => Out::Str(row.id.to_owned()),
                "name" => Out::Str(row.name.to_owned()),
                "description" => Out::Str(row.description.to_owned()),
                "owner" => {
                    fx.hit(Resolver::Owner);
                    if fx.has(FaultId::Logic(Target::Owner)) {
                        return Err(Crash("owner resolver failed".into()));
                    }
                    if fx.has(FaultId::WrongType(Target::Owner)) {
                        Out::List(users(&[row.owner]))
                    } else if fx.has(FaultId::WrongField(Target::Owner)) {
                        USERS
                            .iter()
                            .position(|u| u.name == row.owner)
                            .map_or(Out::Null, Out::User)
                    } else {
                        user_index(row.owner).map_or(Out::Null, Out::User)
                    }
                }
                "members" => {
                    fx.hit(Resolver::Members);
                    if fx.has(FaultId::Logic(Target::Members)) {
                        return Err(Crash("members resolver failed".into()));
                    }
                    if fx.has(FaultId::WrongType(Target::Members)) {
                        Out::List(vec![Out::List(users(row.members))])
                    } else if fx.has(FaultId::WrongField(Target::Members)) {
                        Out::List(
                            (0..USERS.len())
                                .filter(|&u| row.members.contains(&USERS[u].name))
                                .map(Out::User)
                                .collect(),
                        )
                    } else {
                        Out::List(users(row.members))
                    }
                }
                _ => Out::Null,
            }
        }
        (Parent::User(u), field) => {
            let row = &USERS[u];
            match field {
                "id" => Out::Str(row.id.to_owned()),
                "name" => Out::Str(row.name.to_owned()),
                "age" => Out::Int(row.age),
                "projects" => {
                    fx.hit(Resolver::UserProjects);
                    Out::List(projects_of(row.id).into_iter().map(Out::Project).collect())
                }
                _ => Out::Null,
            }
        }
        _ => Out::Null,
    })
}

fn field_error(path: &[Value], errors: &mut Vec<Value>, message: String) {
    errors.push(json!({"message": message, "path": path}));
}

/// Complete `out` against `ty`. `Ok(None)` is a null that must propagate
/// to the nearest nullable ancestor; its error is already recorded.
fn complete(
    fx: &Fixture,
    out: Out,
    ty: &TypeRef,
    node: &QueryTree,
    path: &mut Vec<Value>,
    errors: &mut Vec<Value>,
) -> Result<Option<Value>, Crash> {
    if ty.kind == TypeKind::NonNull {
        let inner = ty.of_type.as_deref().expect("non-null wraps a type");
        return Ok(match complete(fx, out, inner, node, path, errors)? {
            Some(Value::Null) => {
                field_error(
                    path,
                    errors,
                    format!("non-null field `{}` resolved to null", node.name),
                );
                None
            }
            other => other,
        });
    }
    if matches!(out, Out::Null) {
        return Ok(Some(Value::Null));
    }
    Ok(Some(
        complete_nullable(fx, out, ty, node, path, errors)?.unwrap_or(Value::Null),
    ))
}

fn complete_nullable(
    fx: &Fixture,
    out: Out,
    ty: &TypeRef,
    node: &QueryTree,
    path: &mut Vec<Value>,
    errors: &mut Vec<Value>,
) -> Result<Option<Value>, Crash> {
    if ty.kind == TypeKind::List {
        let Out::List(items) = out else {
            field_error(path, errors, format!("expected a list for `{}`", node.name));
            return Ok(None);
        };
        let inner = ty.of_type.as_deref().expect("list wraps a type");
        let mut values = Vec::with_capacity(items.len());
        for (i, item) in items.into_iter().enumerate() {
            path.push(json!(i));
            let v = complete(fx, item, inner, node, path, errors);
            path.pop();
            match v? {
                Some(v) => values.push(v),
                None => return Ok(None),
            }
        }
        return Ok(Some(Value::Array(values)));
    }
    let type_name = ty.type_name();
    let parent = match out {
        Out::Project(p) if type_name == "Project" => Parent::Project(p),
        Out::User(u) if type_name == "User" => Parent::User(u),
        Out::Str(s) if matches!(type_name, "String" | "ID") => return Ok(Some(Value::String(s))),
        Out::Int(n) if type_name == "Int" => return Ok(Some(json!(n))),
        Out::Bool(b) if type_name == "Boolean" => return Ok(Some(Value::Bool(b))),
        Out::List(_) => {
            field_error(
                path,
                errors,
                format!(
                    "`{}` expected a single {type_name} but got a list",
                    node.name
                ),
            );
            return Ok(None);
        }
        _ => {
            field_error(
                path,
                errors,
                format!("`{}` cannot be completed as {type_name}", node.name),
            );
            return Ok(None);
        }
    };
    let schema = fixture_schema();
    let spec = schema.object(type_name).expect("object type");
    let mut obj = Map::new();
    for child in &node.children {
        if obj.contains_key(&child.name) {
            continue;
        }
        if child.name == "__typename" {
            obj.insert(child.name.clone(), Value::String(type_name.to_owned()));
            continue;
        }
        let field = spec.field(&child.name).expect("validated");
        let resolved = resolve(fx, parent, child)?;
        path.push(json!(child.name));
        let v = complete(fx, resolved, &field.ty, child, path, errors);
        path.pop();
        match v? {
            Some(v) => {
                obj.insert(child.name.clone(), v);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(Value::Object(obj)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(faults: &[FaultId], query: &str) -> FixtureResponse {
        Fixture::new(faults.iter().copied()).execute_query(query)
    }

    #[test]
    fn baseline_lookup() {
        let r = run(
            &[],
            r#"{ project(id: "101") { name owner { name } members { id } } }"#,
        );
        assert_eq!(r.status, 200);
        assert_eq!(
            r.body,
            json!({"data": {"project": {
                "name": "apollo",
                "owner": {"name": "alice"},
                "members": [{"id": "201"}, {"id": "202"}, {"id": "203"}]
            }}})
        );
    }

    #[test]
    fn invalid_queries_are_400() {
        assert_eq!(run(&[], "{ project(id: 1) { name } }").status, 400);
        assert_eq!(run(&[], "{ project { name } }").status, 400);
        assert_eq!(run(&[], r#"{ project(id: "1") }"#).status, 400);
        assert_eq!(run(&[], r#"{ project(id: "1") { nope } }"#).status, 400);
        assert_eq!(run(&[], "{ ").status, 400);
    }

    #[test]
    fn wrong_type_members_is_field_error() {
        let r = run(
            &[FaultId::WrongType(Target::Members)],
            r#"{ user(id: 204) { projects { members { name } } } }"#,
        );
        assert_eq!(r.status, 200);
        assert!(!r.body["errors"].as_array().unwrap().is_empty());
        assert_eq!(
            r.body["data"]["user"]["projects"][0]["members"],
            json!([null])
        );
    }

    #[test]
    fn non_null_propagation() {
        let mut errors = Vec::new();
        let fx = Fixture::default();
        let ty = TypeRef::non_null(TypeRef::named(TypeKind::Scalar, "ID"));
        let got = complete(
            &fx,
            Out::Null,
            &ty,
            &QueryTree::leaf("id"),
            &mut vec![],
            &mut errors,
        );
        assert!(matches!(got, Ok(None)));
        assert_eq!(errors.len(), 1);
    }
}
