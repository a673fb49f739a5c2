//! Reading GraphQL query text back into [`QueryTree`]s, for offline
//! coverage of recorded corpora and for the fixture server.

use std::collections::HashMap;

use graphql_parser::query::{
    self as ast, Definition, Document, FragmentDefinition, OperationDefinition, Selection,
    SelectionSet,
};

use super::{QueryTree, SynthesisError};
use crate::schema::Operation;
use crate::value::ArgValue;

/// The first operation of a document, with named fragments inlined.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOperation {
    pub operation: Operation,
    pub roots: Vec<QueryTree>,
}

type Fragments<'d> = HashMap<&'d str, &'d FragmentDefinition<'d, String>>;

pub fn parse_document(text: &str) -> Result<ParsedOperation, SynthesisError> {
    let doc: Document<'_, String> =
        ast::parse_query(text).map_err(|e| SynthesisError::Parse(e.to_string()))?;
    let fragments: Fragments<'_> = doc
        .definitions
        .iter()
        .filter_map(|d| match d {
            Definition::Fragment(f) => Some((f.name.as_str(), f)),
            _ => None,
        })
        .collect();
    let (operation, selection) = doc
        .definitions
        .iter()
        .find_map(|d| match d {
            Definition::Operation(OperationDefinition::SelectionSet(s)) => {
                Some((Operation::Query, s))
            }
            Definition::Operation(OperationDefinition::Query(q)) => {
                Some((Operation::Query, &q.selection_set))
            }
            Definition::Operation(OperationDefinition::Mutation(m)) => {
                Some((Operation::Mutation, &m.selection_set))
            }
            _ => None,
        })
        .ok_or_else(|| SynthesisError::Parse("no query or mutation operation".to_owned()))?;
    let roots = convert_selection(selection, None, &fragments, 0)?;
    Ok(ParsedOperation { operation, roots })
}

const MAX_FRAGMENT_DEPTH: usize = 32;

fn convert_selection(
    set: &SelectionSet<'_, String>,
    fragment_on: Option<&str>,
    fragments: &Fragments<'_>,
    depth: usize,
) -> Result<Vec<QueryTree>, SynthesisError> {
    if depth > MAX_FRAGMENT_DEPTH {
        return Err(SynthesisError::Parse(
            "fragment nesting too deep".to_owned(),
        ));
    }
    let mut out = Vec::new();
    for item in &set.items {
        match item {
            Selection::Field(field) => {
                let args = field
                    .arguments
                    .iter()
                    .map(|(name, v)| Ok((name.clone(), convert_value(v)?)))
                    .collect::<Result<_, SynthesisError>>()?;
                out.push(QueryTree {
                    name: field.name.clone(),
                    args,
                    fragment_on: fragment_on.map(str::to_owned),
                    children: convert_selection(&field.selection_set, None, fragments, depth)?,
                });
            }
            Selection::InlineFragment(inline) => {
                let on = match &inline.type_condition {
                    Some(ast::TypeCondition::On(t)) => Some(t.as_str()),
                    None => fragment_on,
                };
                out.extend(convert_selection(
                    &inline.selection_set,
                    on,
                    fragments,
                    depth + 1,
                )?);
            }
            Selection::FragmentSpread(spread) => {
                let def = fragments
                    .get(spread.fragment_name.as_str())
                    .ok_or_else(|| {
                        SynthesisError::Parse(format!(
                            "unknown fragment `{}`",
                            spread.fragment_name
                        ))
                    })?;
                let ast::TypeCondition::On(on) = &def.type_condition;
                out.extend(convert_selection(
                    &def.selection_set,
                    Some(on),
                    fragments,
                    depth + 1,
                )?);
            }
        }
    }
    Ok(out)
}

fn convert_value(v: &ast::Value<'_, String>) -> Result<ArgValue, SynthesisError> {
    Ok(match v {
        ast::Value::Variable(name) => {
            return Err(SynthesisError::Parse(format!(
                "variables are not supported (${name})"
            )))
        }
        ast::Value::Int(n) => ArgValue::Int(
            n.as_i64()
                .ok_or_else(|| SynthesisError::Parse("integer out of range".to_owned()))?,
        ),
        ast::Value::Float(f) => ArgValue::Float(*f),
        ast::Value::String(s) => ArgValue::String(s.clone()),
        ast::Value::Boolean(b) => ArgValue::Boolean(*b),
        ast::Value::Null => ArgValue::Null,
        ast::Value::Enum(e) => ArgValue::Enum(e.clone()),
        ast::Value::List(items) => {
            ArgValue::List(items.iter().map(convert_value).collect::<Result<_, _>>()?)
        }
        ast::Value::Object(fields) => ArgValue::Object(
            fields
                .iter()
                .map(|(k, v)| Ok((k.clone(), convert_value(v)?)))
                .collect::<Result<_, SynthesisError>>()?,
        ),
    })
}
