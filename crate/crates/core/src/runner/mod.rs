//! The test loop: sizes, generation, execution, properties, shrinking and
//! reporting.

mod execute;
mod properties;
mod report;
pub mod shrink;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::{query_tuples, response_tuples, CoverageState, CoverageTuple};
use crate::generators::{CharsetMode, GenContext, GeneratorRegistry};
use crate::schema::{derive_response_specs, SchemaModel, Strictness};
use crate::synthesis::{
    build_tree, generate_flat, serialize, FlatQuery, QueryTree, SynthesisConfig, SynthesisError,
};

pub use execute::{fetch_introspection, ExecutionResult, Executor, HttpExecutor};
pub use properties::{check_properties, CheckContext, PropertyId, PropertyVerdict};
pub use report::{Counts, FailureReport, Outcome, QueryRecord, TestReport};
pub use shrink::{shrink, ShrinkOutcome, SHRINK_BUDGET};

/// Draws per test case before a query that cleans down to nothing is
/// given up on.
pub const MAX_REDRAWS: u32 = 100;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub endpoint: String,
    pub num_tests: u32,
    pub max_size: u32,
    /// Use this size for every test instead of the ramp.
    pub size_fixed: Option<u32>,
    pub max_fields: u32,
    pub max_iterations: u32,
    pub seed: u64,
    pub include_mutations: bool,
    pub charset: CharsetMode,
    pub enabled_properties: BTreeSet<PropertyId>,
    pub headers: BTreeMap<String, String>,
    pub timeout_ms: u64,
    pub workers: u32,
    pub strict: bool,
    pub include_roots: bool,
    pub filters: BTreeSet<CoverageTuple>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            endpoint: String::new(),
            num_tests: 100,
            max_size: 10,
            size_fixed: None,
            max_fields: 2,
            max_iterations: 10,
            seed: 0,
            include_mutations: false,
            charset: CharsetMode::Alphanumeric,
            enabled_properties: PropertyId::all(),
            headers: BTreeMap::new(),
            timeout_ms: 10_000,
            workers: 1,
            strict: false,
            include_roots: true,
            filters: BTreeSet::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        let positive = [
            ("num_tests", self.num_tests),
            ("max_size", self.max_size),
            ("max_fields", self.max_fields),
            ("max_iterations", self.max_iterations),
            ("workers", self.workers),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(RunError::InvalidConfig(format!(
                    "{name} must be at least 1"
                )));
            }
        }
        if self.size_fixed == Some(0) {
            return Err(RunError::InvalidConfig(
                "size_fixed must be at least 1".into(),
            ));
        }
        if self.enabled_properties.is_empty() {
            return Err(RunError::InvalidConfig("no properties enabled".into()));
        }
        Ok(())
    }

    /// Size of test `i` (1-based): the fixed size, or
    /// `max(1, ceil(i * max_size / num_tests))`.
    pub fn size_for(&self, i: u32) -> u32 {
        if let Some(s) = self.size_fixed {
            return s;
        }
        let n = self.num_tests.max(1) as u64;
        let s = (i as u64 * self.max_size as u64).div_ceil(n);
        s.clamp(1, self.max_size.max(1) as u64) as u32
    }

    pub fn strictness(&self) -> Strictness {
        if self.strict {
            Strictness::strict()
        } else {
            Strictness::default()
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    fn synthesis(&self, size: u32) -> SynthesisConfig {
        SynthesisConfig {
            max_fields: self.max_fields,
            max_iterations: self.max_iterations,
            size,
            include_mutations: self.include_mutations,
        }
    }

    /// Tuples excluded from coverage: the given filters plus, when
    /// mutations are not generated, every mutation-root field.
    pub fn effective_filters(&self, schema: &SchemaModel) -> BTreeSet<CoverageTuple> {
        let mut filters = self.filters.clone();
        if !self.include_mutations {
            if let Some(m) = schema
                .mutation_root
                .as_deref()
                .and_then(|m| schema.object(m))
            {
                filters.extend(
                    m.fields
                        .iter()
                        .map(|f| CoverageTuple::new(&m.name, &f.name)),
                );
            }
        }
        filters
    }
}

/// One generated test case, ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub index: u64,
    pub size: u32,
    pub flat: FlatQuery,
    pub tree: QueryTree,
    pub query: String,
}

/// Generate test case `index` (0-based). `None` if every draw cleaned down
/// to an empty query.
pub fn generate_case(
    cfg: &RunConfig,
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
    index: u64,
) -> Result<Option<TestCase>, RunError> {
    let size = cfg.size_for(index as u32 + 1);
    let mut ctx = GenContext::for_test(cfg.seed, index, size, cfg.charset).with_strict(cfg.strict);
    let synth = cfg.synthesis(size);
    for _ in 0..MAX_REDRAWS {
        let flat = generate_flat(schema, &synth, registry, &mut ctx)?.cleaned();
        if flat.nodes.is_empty() {
            continue;
        }
        let tree = build_tree(&flat.nodes)?;
        let query = serialize(&tree, flat.operation);
        return Ok(Some(TestCase {
            index,
            size,
            flat,
            tree,
            query,
        }));
    }
    Ok(None)
}

/// Run against `cfg.endpoint` over HTTP.
pub fn run(
    cfg: &RunConfig,
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
) -> Result<TestReport, RunError> {
    let executor = HttpExecutor::new(&cfg.endpoint, cfg.headers.clone(), cfg.timeout());
    run_with(cfg, schema, registry, &executor)
}

/// Run against any executor.
pub fn run_with(
    cfg: &RunConfig,
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
    executor: &dyn Executor,
) -> Result<TestReport, RunError> {
    cfg.validate()?;
    let specs = derive_response_specs(schema);
    let cases = (0..cfg.num_tests as u64)
        .map(|i| generate_case(cfg, schema, registry, i))
        .collect::<Result<Vec<_>, _>>()?;
    let results = execute_all(&cases, executor, cfg.workers as usize);

    let cx = CheckContext {
        schema,
        specs: &specs,
        enabled: &cfg.enabled_properties,
        strictness: cfg.strictness(),
    };
    let filters = cfg.effective_filters(schema);
    let mut coverage = CoverageState::for_schema(schema, filters, cfg.include_roots);
    let mut response_coverage = coverage.empty_like();
    let mut counts = Counts::default();
    let mut records = Vec::new();
    let mut first_failures: BTreeMap<PropertyId, (usize, PropertyVerdict)> = BTreeMap::new();
    let mut occurrences: BTreeMap<PropertyId, u64> = BTreeMap::new();

    for (case, result) in cases.iter().zip(results) {
        let (Some(case), Some(result)) = (case, result) else {
            counts.discarded += 1;
            continue;
        };
        let verdicts = check_properties(&result, &case.tree, case.flat.operation, &cx);
        let outcome = if verdicts.iter().any(|v| !v.passed) {
            Outcome::Failed
        } else if result.is_client_error() {
            Outcome::ClientError
        } else {
            Outcome::Passed
        };
        counts.executed += 1;
        match outcome {
            Outcome::Passed => counts.passed += 1,
            Outcome::Failed => counts.failed += 1,
            Outcome::ClientError => counts.client_errors += 1,
        }
        for v in verdicts.iter().filter(|v| !v.passed) {
            *occurrences.entry(v.property).or_default() += 1;
            first_failures
                .entry(v.property)
                .or_insert_with(|| (records.len(), v.clone()));
        }

        let tuples = query_tuples(&case.tree, case.flat.operation, schema);
        coverage.record(&tuples);
        if let Some(data) = result.body.as_ref().and_then(|b| b.get("data")) {
            if let Ok(seen) = response_tuples(data, &case.tree, case.flat.operation, schema) {
                response_coverage.record(&seen);
            }
        }
        records.push((
            case,
            QueryRecord {
                index: case.index,
                size: case.size,
                operation: case.flat.operation,
                query: case.query.clone(),
                status: result.status,
                transport_error: result.transport_error.clone(),
                outcome,
                verdicts,
                tuples: tuples.into_iter().collect(),
                latency_ms: result.latency.as_secs_f64() * 1000.0,
            },
        ));
    }

    let failures = first_failures
        .into_iter()
        .map(|(property, (at, verdict))| {
            let case = records[at].0;
            let outcome = shrink_case(case, property, &cx, executor);
            FailureReport {
                property,
                index: case.index,
                detail: verdict.detail,
                path: verdict.path,
                original_query: case.query.clone(),
                original_nodes: case.tree.node_count(),
                shrunk_nodes: outcome.tree.node_count(),
                shrunk_query: outcome.query,
                shrink_executions: outcome.executions,
                shrink_budget_exceeded: outcome.budget_exceeded,
                occurrences: occurrences[&property],
            }
        })
        .collect();

    Ok(TestReport {
        config: cfg.clone(),
        counts,
        coverage: coverage.report(),
        response_coverage: response_coverage.report(),
        failures,
        queries: records.into_iter().map(|(_, r)| r).collect(),
        coverage_state: coverage,
    })
}

/// Shrink a failing case against `executor`, keeping only candidates that
/// still fail `property`.
pub fn shrink_case(
    case: &TestCase,
    property: PropertyId,
    cx: &CheckContext<'_>,
    executor: &dyn Executor,
) -> ShrinkOutcome {
    let operation = case.flat.operation;
    shrink(&case.flat, cx.schema, SHRINK_BUDGET, |tree, text| {
        let result = executor.execute(text);
        check_properties(&result, tree, operation, cx)
            .iter()
            .any(|v| v.property == property && !v.passed)
    })
}

fn execute_all(
    cases: &[Option<TestCase>],
    executor: &dyn Executor,
    workers: usize,
) -> Vec<Option<ExecutionResult>> {
    let workers = workers.clamp(1, cases.len().max(1));
    if workers == 1 {
        return cases
            .iter()
            .map(|c| c.as_ref().map(|c| executor.execute(&c.query)))
            .collect();
    }
    let mut results: Vec<Option<ExecutionResult>> = vec![None; cases.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    cases
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .filter_map(|(i, c)| c.as_ref().map(|c| (i, executor.execute(&c.query))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    results
}
