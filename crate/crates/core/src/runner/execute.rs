use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde_json::Value;

use crate::schema::INTROSPECTION_QUERY;
use crate::synthesis::envelope;

/// Outcome of sending one query. Either a response (status and body) or a
/// transport error, never both.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionResult {
    pub status: Option<u16>,
    /// Parsed JSON body; a body that is not JSON is kept as a JSON string.
    pub body: Option<Value>,
    pub latency: Duration,
    pub transport_error: Option<String>,
}

impl ExecutionResult {
    pub fn response(status: u16, body: Value, latency: Duration) -> Self {
        ExecutionResult {
            status: Some(status),
            body: Some(body),
            latency,
            transport_error: None,
        }
    }

    pub fn transport(message: impl Into<String>, latency: Duration) -> Self {
        ExecutionResult {
            status: None,
            body: None,
            latency,
            transport_error: Some(message.into()),
        }
    }

    pub fn is_success(&self) -> bool {
        self.status.is_some_and(|s| (200..300).contains(&s))
    }

    pub fn is_client_error(&self) -> bool {
        self.status.is_some_and(|s| (400..500).contains(&s))
    }
}

/// Something that can run GraphQL query text.
pub trait Executor: Sync {
    fn execute(&self, query: &str) -> ExecutionResult;
}

/// POSTs `{"query": ...}` as JSON.
#[derive(Debug, Clone)]
pub struct HttpExecutor {
    endpoint: String,
    headers: BTreeMap<String, String>,
    agent: ureq::Agent,
}

impl HttpExecutor {
    pub fn new(
        endpoint: impl Into<String>,
        headers: BTreeMap<String, String>,
        timeout: Duration,
    ) -> Self {
        HttpExecutor {
            endpoint: endpoint.into(),
            headers,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    fn post(&self, body: &str) -> ExecutionResult {
        let start = Instant::now();
        let mut request = self
            .agent
            .post(&self.endpoint)
            .set("Content-Type", "application/json");
        for (k, v) in &self.headers {
            request = request.set(k, v);
        }
        let (status, response) = match request.send_string(body) {
            Ok(r) => (r.status(), r),
            Err(ureq::Error::Status(code, r)) => (code, r),
            Err(ureq::Error::Transport(t)) => {
                return ExecutionResult::transport(t.to_string(), start.elapsed())
            }
        };
        let text = match response.into_string() {
            Ok(t) => t,
            Err(e) => return ExecutionResult::transport(e.to_string(), start.elapsed()),
        };
        let body = serde_json::from_str(&text).unwrap_or(Value::String(text));
        ExecutionResult::response(status, body, start.elapsed())
    }
}

impl Executor for HttpExecutor {
    fn execute(&self, query: &str) -> ExecutionResult {
        self.post(&envelope(query).to_string())
    }
}

/// Run the standard introspection query and return its `data` object.
pub fn fetch_introspection(executor: &dyn Executor) -> Result<Value, String> {
    let result = executor.execute(INTROSPECTION_QUERY);
    if let Some(err) = result.transport_error {
        return Err(err);
    }
    let status = result.status.unwrap_or_default();
    let body = result.body.unwrap_or(Value::Null);
    if !(200..300).contains(&status) {
        return Err(format!("introspection returned HTTP {status}"));
    }
    match body.get("data") {
        Some(data) if data.get("__schema").is_some() => Ok(data.clone()),
        _ => Err("introspection response has no `data.__schema`".to_owned()),
    }
}
