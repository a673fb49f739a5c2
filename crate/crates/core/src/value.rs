//! Argument values as GraphQL input literals.

use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A generated argument value.
///
/// Kept separate from [`serde_json::Value`] because enum values have to be
/// rendered bare (`ORDER_ASC`) while strings are quoted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ArgValue {
    Null,
    Int(i64),
    Float(f64),
    String(String),
    Boolean(bool),
    Enum(String),
    List(Vec<ArgValue>),
    Object(Vec<(String, ArgValue)>),
}

impl ArgValue {
    pub fn to_json(&self) -> Value {
        match self {
            ArgValue::Null => Value::Null,
            ArgValue::Int(i) => Value::from(*i),
            ArgValue::Float(f) => serde_json::Number::from_f64(*f)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            ArgValue::String(s) | ArgValue::Enum(s) => Value::String(s.clone()),
            ArgValue::Boolean(b) => Value::Bool(*b),
            ArgValue::List(items) => Value::Array(items.iter().map(ArgValue::to_json).collect()),
            ArgValue::Object(fields) => Value::Object(
                fields
                    .iter()
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect(),
            ),
        }
    }

    /// The smallest literal of the same shape: `""`, `0`, `false`, `[]`.
    ///
    /// Enums and objects have no schema-free minimum and are returned as is.
    pub fn minimal(&self) -> ArgValue {
        match self {
            ArgValue::Int(_) => ArgValue::Int(0),
            ArgValue::Float(_) => ArgValue::Float(0.0),
            ArgValue::String(_) => ArgValue::String(String::new()),
            ArgValue::Boolean(_) => ArgValue::Boolean(false),
            ArgValue::List(_) => ArgValue::List(Vec::new()),
            other => other.clone(),
        }
    }

    /// Write the value in GraphQL input-literal syntax.
    pub fn write_literal(&self, out: &mut String) {
        match self {
            ArgValue::Null => out.push_str("null"),
            ArgValue::Int(i) => {
                let _ = write!(out, "{i}");
            }
            ArgValue::Float(f) => write_float(*f, out),
            ArgValue::String(s) => write_string_literal(s, out),
            ArgValue::Boolean(b) => out.push_str(if *b { "true" } else { "false" }),
            ArgValue::Enum(e) => out.push_str(e),
            ArgValue::List(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write_literal(out);
                }
                out.push(']');
            }
            ArgValue::Object(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(k);
                    out.push_str(": ");
                    v.write_literal(out);
                }
                out.push('}');
            }
        }
    }
}

impl fmt::Display for ArgValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_literal(&mut s);
        f.write_str(&s)
    }
}

// GraphQL float literals need a fraction or an exponent.
fn write_float(f: f64, out: &mut String) {
    let f = if f.is_finite() { f } else { 0.0 };
    let text = format!("{f:?}");
    if text.contains(['.', 'e', 'E']) {
        out.push_str(&text);
    } else {
        out.push_str(&text);
        out.push_str(".0");
    }
}

/// Quote `s` as a GraphQL string literal.
///
/// `"` and `\` are backslash-escaped and every control character below
/// U+0020 is escaped, since raw line terminators are not allowed inside a
/// string value.
pub fn write_string_literal(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            // Some parsers misread `\b`; the numeric form is unambiguous.
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}
