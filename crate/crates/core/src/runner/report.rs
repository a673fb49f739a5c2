use serde::{Deserialize, Serialize};

use super::{PropertyId, PropertyVerdict, RunConfig};
use crate::coverage::{CoverageReport, CoverageState, CoverageTuple};
use crate::schema::Operation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Passed,
    Failed,
    ClientError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub index: u64,
    pub size: u32,
    pub operation: Operation,
    pub query: String,
    pub status: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport_error: Option<String>,
    pub outcome: Outcome,
    pub verdicts: Vec<PropertyVerdict>,
    pub tuples: Vec<CoverageTuple>,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub property: PropertyId,
    /// Index of the first query that failed the property.
    pub index: u64,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub original_query: String,
    pub original_nodes: usize,
    pub shrunk_query: String,
    pub shrunk_nodes: usize,
    pub shrink_executions: u32,
    pub shrink_budget_exceeded: bool,
    /// How many queries failed this property in total.
    pub occurrences: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub executed: u64,
    pub passed: u64,
    pub failed: u64,
    pub client_errors: u64,
    /// Draws whose query cleaned down to nothing; never executed.
    pub discarded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub config: RunConfig,
    pub counts: Counts,
    pub coverage: CoverageReport,
    pub response_coverage: CoverageReport,
    pub failures: Vec<FailureReport>,
    pub queries: Vec<QueryRecord>,
    #[serde(skip)]
    pub coverage_state: CoverageState,
}

impl TestReport {
    /// 0 when every property held, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }

    pub fn failed_properties(&self) -> Vec<PropertyId> {
        self.failures.iter().map(|f| f.property).collect()
    }

    /// Query texts in execution order, one per line.
    pub fn query_log(&self) -> String {
        self.queries
            .iter()
            .map(|q| format!("{}\n", q.query))
            .collect()
    }

    /// The report as JSON with latency values zeroed, for comparing runs.
    pub fn without_latency(&self) -> TestReport {
        let mut copy = self.clone();
        for q in &mut copy.queries {
            q.latency_ms = 0.0;
        }
        copy
    }

    pub fn summary(&self) -> String {
        let c = &self.counts;
        let mut out = format!(
            "executed {} (passed {}, failed {}, client errors {}, discarded {})\n\
             coverage {:.2}% ({}/{}), response coverage {:.2}%\n",
            c.executed,
            c.passed,
            c.failed,
            c.client_errors,
            c.discarded,
            self.coverage.percent * 100.0,
            self.coverage.covered_size,
            self.coverage.universe_size,
            self.response_coverage.percent * 100.0,
        );
        if self.failures.is_empty() {
            out.push_str("all properties passed\n");
        }
        for f in &self.failures {
            out.push_str(&format!(
                "FAIL {} x{}: {}\n  shrunk ({} nodes): {}\n",
                f.property, f.occurrences, f.detail, f.shrunk_nodes, f.shrunk_query
            ));
        }
        out
    }
}
