use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ExecutionResult;
use crate::schema::{Operation, ResponseSpecs, SchemaModel, Strictness};
use crate::synthesis::QueryTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PropertyId {
    /// Status below 500 and no transport error.
    NoServerError,
    /// `data` matches the response spec of the requested selection.
    SchemaConformance,
    /// A 2xx response carries no `errors` entries.
    NoErrorsSection,
}

impl PropertyId {
    pub const ALL: [PropertyId; 3] = [
        PropertyId::NoServerError,
        PropertyId::SchemaConformance,
        PropertyId::NoErrorsSection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::NoServerError => "NO_SERVER_ERROR",
            PropertyId::SchemaConformance => "SCHEMA_CONFORMANCE",
            PropertyId::NoErrorsSection => "NO_ERRORS_SECTION",
        }
    }

    pub fn all() -> BTreeSet<PropertyId> {
        Self::ALL.into_iter().collect()
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        PropertyId::ALL
            .into_iter()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| format!("unknown property `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: PropertyId,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl PropertyVerdict {
    fn pass(property: PropertyId) -> Self {
        PropertyVerdict {
            property,
            passed: true,
            detail: String::new(),
            path: None,
        }
    }

    fn fail(property: PropertyId, detail: impl Into<String>, path: Option<String>) -> Self {
        PropertyVerdict {
            property,
            passed: false,
            detail: detail.into(),
            path,
        }
    }
}

/// What a property check needs besides the result itself.
#[derive(Debug, Clone, Copy)]
pub struct CheckContext<'a> {
    pub schema: &'a SchemaModel,
    pub specs: &'a ResponseSpecs,
    pub enabled: &'a BTreeSet<PropertyId>,
    pub strictness: Strictness,
}

/// One verdict per enabled property, in [`PropertyId`] order.
pub fn check_properties(
    result: &ExecutionResult,
    tree: &QueryTree,
    operation: Operation,
    cx: &CheckContext<'_>,
) -> Vec<PropertyVerdict> {
    cx.enabled
        .iter()
        .map(|&p| match p {
            PropertyId::NoServerError => no_server_error(result),
            PropertyId::SchemaConformance => schema_conformance(result, tree, operation, cx),
            PropertyId::NoErrorsSection => no_errors_section(result),
        })
        .collect()
}

fn no_server_error(result: &ExecutionResult) -> PropertyVerdict {
    let p = PropertyId::NoServerError;
    if let Some(err) = &result.transport_error {
        return PropertyVerdict::fail(p, format!("transport error: {err}"), None);
    }
    match result.status {
        Some(s) if s >= 500 => PropertyVerdict::fail(p, format!("HTTP status {s}"), None),
        _ => PropertyVerdict::pass(p),
    }
}

fn schema_conformance(
    result: &ExecutionResult,
    tree: &QueryTree,
    operation: Operation,
    cx: &CheckContext<'_>,
) -> PropertyVerdict {
    let p = PropertyId::SchemaConformance;
    let Some(body) = &result.body else {
        return PropertyVerdict::pass(p);
    };
    let Value::Object(obj) = body else {
        if result.is_success() {
            return PropertyVerdict::fail(p, "response body is not a JSON object", None);
        }
        return PropertyVerdict::pass(p);
    };
    let data = match obj.get("data") {
        None | Some(Value::Null) => return PropertyVerdict::pass(p),
        Some(d) => d,
    };
    let Some(root_type) = cx.schema.root_type(operation) else {
        return PropertyVerdict::fail(
            p,
            format!("schema has no {} root", operation.keyword()),
            None,
        );
    };
    match cx
        .specs
        .validate_selection(root_type, tree, data, cx.strictness)
    {
        Ok(()) => PropertyVerdict::pass(p),
        Err(v) => PropertyVerdict::fail(p, v.message, Some(v.path)),
    }
}

fn no_errors_section(result: &ExecutionResult) -> PropertyVerdict {
    let p = PropertyId::NoErrorsSection;
    if !result.is_success() {
        return PropertyVerdict::pass(p);
    }
    match result.body.as_ref().and_then(|b| b.get("errors")) {
        Some(Value::Array(errors)) if !errors.is_empty() => {
            let first = errors[0]
                .get("message")
                .and_then(Value::as_str)
                .unwrap_or("unnamed error");
            PropertyVerdict::fail(
                p,
                format!(
                    "{} error(s) with a 2xx status; first: {first}",
                    errors.len()
                ),
                Some("errors".to_owned()),
            )
        }
        _ => PropertyVerdict::pass(p),
    }
}
