use std::sync::OnceLock;

use serde_json::{json, Value};

use crate::schema::{parse_introspection, SchemaModel};

fn named(kind: &str, name: &str) -> Value {
    json!({"kind": kind, "name": name, "ofType": null})
}

fn scalar_ref(name: &str) -> Value {
    named("SCALAR", name)
}

fn object_ref(name: &str) -> Value {
    named("OBJECT", name)
}

fn non_null(inner: Value) -> Value {
    json!({"kind": "NON_NULL", "name": null, "ofType": inner})
}

fn list(inner: Value) -> Value {
    json!({"kind": "LIST", "name": null, "ofType": inner})
}

fn arg(name: &str, ty: Value) -> Value {
    json!({"name": name, "description": null, "type": ty, "defaultValue": null})
}

fn field(name: &str, ty: Value, args: Vec<Value>) -> Value {
    json!({
        "name": name,
        "description": null,
        "args": args,
        "type": ty,
        "isDeprecated": false,
        "deprecationReason": null,
    })
}

fn object(name: &str, fields: Vec<Value>) -> Value {
    json!({
        "kind": "OBJECT",
        "name": name,
        "description": null,
        "fields": fields,
        "inputFields": null,
        "interfaces": [],
        "enumValues": null,
        "possibleTypes": null,
    })
}

fn scalar(name: &str) -> Value {
    json!({
        "kind": "SCALAR",
        "name": name,
        "description": null,
        "fields": null,
        "inputFields": null,
        "interfaces": null,
        "enumValues": null,
        "possibleTypes": null,
    })
}

fn build() -> Value {
    let id = || non_null(scalar_ref("ID"));
    let types = vec![
        object(
            "Query",
            vec![
                field(
                    "project",
                    object_ref("Project"),
                    vec![arg("id", non_null(scalar_ref("String")))],
                ),
                field(
                    "projects",
                    list(object_ref("Project")),
                    vec![arg("ownerId", id())],
                ),
                field("user", object_ref("User"), vec![arg("id", id())]),
                field(
                    "users",
                    list(object_ref("User")),
                    vec![arg("projectId", id())],
                ),
            ],
        ),
        object(
            "Mutation",
            vec![field(
                "touch",
                scalar_ref("Boolean"),
                vec![arg("id", scalar_ref("ID"))],
            )],
        ),
        object(
            "Project",
            vec![
                field("id", id(), vec![]),
                field("name", scalar_ref("String"), vec![]),
                field("description", scalar_ref("String"), vec![]),
                field("owner", object_ref("User"), vec![]),
                field("members", list(object_ref("User")), vec![]),
            ],
        ),
        object(
            "User",
            vec![
                field("id", id(), vec![]),
                field("name", scalar_ref("String"), vec![]),
                field("age", scalar_ref("Int"), vec![]),
                field("projects", list(object_ref("Project")), vec![]),
            ],
        ),
        scalar("ID"),
        scalar("String"),
        scalar("Int"),
        scalar("Boolean"),
    ];
    json!({
        "__schema": {
            "queryType": {"name": "Query"},
            "mutationType": {"name": "Mutation"},
            "subscriptionType": null,
            "types": types,
            "directives": [],
        }
    })
}

/// The fixture's introspection result, i.e. the `data` object of the
/// standard introspection query.
pub fn introspection() -> &'static Value {
    static DOC: OnceLock<Value> = OnceLock::new();
    DOC.get_or_init(build)
}

/// The fixture schema as a model.
pub fn fixture_schema() -> &'static SchemaModel {
    static MODEL: OnceLock<SchemaModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        parse_introspection(introspection()).expect("fixture introspection is well formed")
    })
}
