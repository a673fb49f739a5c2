mod oracles;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use qlcheck::coverage::{query_tuples, response_tuples, schema_tuples};
use qlcheck::fixture::{fixture_schema, introspection, Fixture};
use qlcheck::schema::parse_introspection;
use qlcheck::synthesis::{build_tree, generate_flat, serialize};
use qlcheck::{
    CharsetMode, CoverageState, CoverageTuple, GenContext, GeneratorRegistry, Operation, QueryTree,
    SchemaModel, SynthesisConfig,
};
use serde_json::Value;

use oracles::{grammar, reference_tuples};

fn rich_json() -> &'static Value {
    static DOC: OnceLock<Value> = OnceLock::new();
    DOC.get_or_init(|| serde_json::from_str(include_str!("data/rich_schema.json")).unwrap())
}

fn rich() -> &'static SchemaModel {
    static MODEL: OnceLock<SchemaModel> = OnceLock::new();
    MODEL.get_or_init(|| parse_introspection(rich_json()).unwrap())
}

fn raw_schema(doc: &Value) -> &Value {
    let s = doc.get("data").unwrap_or(doc);
    s.get("__schema").unwrap_or(s)
}

/// Universe computed from raw introspection JSON.
fn reference_universe(doc: &Value, include_roots: bool) -> BTreeSet<(String, String)> {
    let schema = raw_schema(doc);
    let roots: Vec<&str> = ["queryType", "mutationType", "subscriptionType"]
        .iter()
        .filter_map(|k| schema[*k]["name"].as_str())
        .collect();
    let mut out = BTreeSet::new();
    for t in schema["types"].as_array().unwrap() {
        let name = t["name"].as_str().unwrap();
        let kind = t["kind"].as_str().unwrap();
        if !matches!(kind, "OBJECT" | "INTERFACE") || name.starts_with("__") {
            continue;
        }
        if !include_roots && roots.contains(&name) {
            continue;
        }
        for f in t["fields"].as_array().into_iter().flatten() {
            let field = f["name"].as_str().unwrap();
            if !field.starts_with("__") {
                out.insert((name.to_owned(), field.to_owned()));
            }
        }
    }
    out
}

fn pairs(tuples: &BTreeSet<CoverageTuple>) -> BTreeSet<(String, String)> {
    tuples
        .iter()
        .map(|t| (t.object_type.clone(), t.field.clone()))
        .collect()
}

fn draw(
    schema: &SchemaModel,
    seed: u64,
    index: u64,
    size: u32,
    max_fields: u32,
) -> Option<(QueryTree, Operation)> {
    let cfg = SynthesisConfig {
        max_fields,
        max_iterations: 10,
        size,
        include_mutations: true,
    };
    let mut ctx = GenContext::for_test(seed, index, size, CharsetMode::Alphanumeric);
    let flat = generate_flat(schema, &cfg, &GeneratorRegistry::new(), &mut ctx)
        .unwrap()
        .cleaned();
    if flat.nodes.is_empty() {
        return None;
    }
    Some((build_tree(&flat.nodes).unwrap(), flat.operation))
}

fn root_name(doc: &Value, op: Operation) -> String {
    let key = match op {
        Operation::Query => "queryType",
        Operation::Mutation => "mutationType",
    };
    raw_schema(doc)[key]["name"].as_str().unwrap().to_owned()
}

/// Tuples recounted from the serialized text with the reference grammar.
fn recount(doc: &Value, text: &str, op: Operation) -> BTreeSet<(String, String)> {
    let parsed = grammar::parse(text).unwrap();
    reference_tuples(
        raw_schema(doc),
        &root_name(doc, op),
        &parsed.operations[0].selection,
    )
}

#[test]
fn universe_matches_raw_introspection() {
    for (schema, doc) in [(rich(), rich_json()), (fixture_schema(), introspection())] {
        for include_roots in [true, false] {
            let got = pairs(&schema_tuples(schema, &BTreeSet::new(), include_roots));
            assert_eq!(got, reference_universe(doc, include_roots));
        }
    }
}

#[test]
fn fixture_universe_size() {
    let all = schema_tuples(fixture_schema(), &BTreeSet::new(), true);
    assert_eq!(all.len(), 14);
    assert_eq!(
        schema_tuples(fixture_schema(), &BTreeSet::new(), false).len(),
        9
    );
}

#[test]
fn filters_are_never_counted() {
    let filters: BTreeSet<_> = [
        CoverageTuple::new("User", "age"),
        CoverageTuple::new("Query", "users"),
    ]
    .into();
    let mut state = CoverageState::for_schema(fixture_schema(), filters.clone(), true);
    assert_eq!(state.universe().len(), 12);
    state.record(&filters);
    assert!(state.covered().is_empty());
    assert_eq!(state.filters(), &filters);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn query_tuples_match_reference(
        seed in any::<u64>(),
        size in 1u32..=40,
        max_fields in 1u32..=4,
        rich_schema in any::<bool>(),
    ) {
        let (schema, doc) = if rich_schema { (rich(), rich_json()) } else { (fixture_schema(), introspection()) };
        let Some((tree, op)) = draw(schema, seed, 0, size, max_fields) else { return Ok(()) };
        let text = serialize(&tree, op);
        prop_assert_eq!(pairs(&query_tuples(&tree, op, schema)), recount(doc, &text, op));
    }

    #[test]
    fn incremental_equals_recount(
        seed in any::<u64>(),
        n in 1u64..40,
        max_fields in 1u32..=3,
        include_roots in any::<bool>(),
        rich_schema in any::<bool>(),
    ) {
        let (schema, doc) = if rich_schema { (rich(), rich_json()) } else { (fixture_schema(), introspection()) };
        let mut state = CoverageState::for_schema(schema, BTreeSet::new(), include_roots);
        let mut texts = Vec::new();
        for i in 0..n {
            let Some((tree, op)) = draw(schema, seed, i, 1 + (i as u32 % 12), max_fields) else { continue };
            state.record(&query_tuples(&tree, op, schema));
            texts.push((serialize(&tree, op), op));
        }
        let universe = reference_universe(doc, include_roots);
        let seen: BTreeSet<_> = texts.iter().flat_map(|(t, op)| recount(doc, t, *op)).collect();
        let expected: BTreeSet<_> = seen.intersection(&universe).cloned().collect();
        prop_assert_eq!(pairs(state.covered()), expected.clone());
        let pct = if universe.is_empty() { 1.0 } else { expected.len() as f64 / universe.len() as f64 };
        prop_assert!((state.percent() - pct).abs() < 1e-12);
    }

    #[test]
    fn merge_laws(a in tuple_subset(), b in tuple_subset(), c in tuple_subset()) {
        let base = CoverageState::for_schema(fixture_schema(), BTreeSet::new(), true);
        let state = |s: &BTreeSet<CoverageTuple>| {
            let mut st = base.empty_like();
            st.record(s);
            st
        };
        let (sa, sb, sc) = (state(&a), state(&b), state(&c));
        let ab = sa.merge(&sb).unwrap();
        prop_assert_eq!(&ab, &sb.merge(&sa).unwrap());
        prop_assert_eq!(ab.merge(&sc).unwrap(), sa.merge(&sb.merge(&sc).unwrap()).unwrap());
        prop_assert_eq!(&sa.merge(&sa).unwrap(), &sa);
        prop_assert_eq!(&sa.merge(&base).unwrap(), &sa);
        prop_assert!(ab.percent() >= sa.percent().max(sb.percent()));
        let union: BTreeSet<_> = a.union(&b).cloned().collect();
        prop_assert_eq!(ab.covered(), &union);
        prop_assert!((0.0..=1.0).contains(&ab.percent()));
    }

    #[test]
    fn response_tuples_within_query_tuples(seed in any::<u64>(), size in 1u32..=30) {
        let schema = fixture_schema();
        let Some((tree, op)) = draw(schema, seed, 0, size, 2) else { return Ok(()) };
        let fixture = Fixture::new([]);
        let resp = fixture.execute_query(&serialize(&tree, op));
        prop_assert_eq!(resp.status, 200);
        let data = &resp.body["data"];
        let seen = response_tuples(data, &tree, op, schema).unwrap();
        let queried = query_tuples(&tree, op, schema);
        prop_assert!(seen.is_subset(&queried));
    }
}

fn tuple_subset() -> impl Strategy<Value = BTreeSet<CoverageTuple>> {
    let all: Vec<_> = schema_tuples(fixture_schema(), &BTreeSet::new(), true)
        .into_iter()
        .collect();
    proptest::sample::subsequence(all.clone(), 0..=all.len()).prop_map(|v| v.into_iter().collect())
}

#[test]
fn merge_rejects_other_universe() {
    let a = CoverageState::for_schema(fixture_schema(), BTreeSet::new(), true);
    let b = CoverageState::for_schema(fixture_schema(), BTreeSet::new(), false);
    assert!(a.merge(&b).is_err());
}

#[test]
fn csv_lists_every_universe_tuple() {
    let mut state = CoverageState::for_schema(fixture_schema(), BTreeSet::new(), false);
    state.record(&[CoverageTuple::new("User", "name")]);
    let csv = state.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("object_type,field,covered"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), state.universe().len());
    assert!(rows.contains(&"User,name,true"));
    assert!(rows.contains(&"User,age,false"));
}
