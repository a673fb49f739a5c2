//! A small Project/User GraphQL server with seedable faults.
//!
//! ```text
//! type Query {
//!   project(id: String!): Project
//!   projects(ownerId: ID!): [Project]
//!   user(id: ID!): User
//!   users(projectId: ID!): [User]
//! }
//! type Mutation { touch(id: ID): Boolean }
//! type Project { id: ID! name: String description: String owner: User members: [User] }
//! type User { id: ID! name: String age: Int projects: [Project] }
//! ```
//!
//! Faults target four resolvers (`project`, `user`, `owner`, `members`):
//!
//! | fault                | behaviour                                               |
//! |----------------------|---------------------------------------------------------|
//! | `input-validation-1` | `project(id)` crashes on an id that is not all digits    |
//! | `input-validation-2` | `project(id)` crashes on an id with a non-alphanumeric char |
//! | `input-validation-3` | `project(id)` crashes on an id longer than 64 chars      |
//! | `logic-*`            | the resolver crashes whenever it runs                    |
//! | `wrong-field-*`      | the resolver matches on `name` instead of `id`           |
//! | `wrong-type-*`       | the resolver returns a list where an object is expected  |
//!
//! Crashes answer 500. Wrong-type results fail completion and come back as
//! a 200 with an `errors` section.

mod data;
mod exec;
mod schema;
mod server;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::generators::GeneratorRegistry;
use crate::runner::{ExecutionResult, Executor};

pub use data::{ProjectRow, UserRow, PROJECTS, USERS};
pub use schema::{fixture_schema, introspection};
pub use server::FixtureServer;

/// A resolver that faults can be attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Project,
    User,
    Owner,
    Members,
}

impl Target {
    pub const ALL: [Target; 4] = [
        Target::Project,
        Target::User,
        Target::Owner,
        Target::Members,
    ];

    fn as_str(self) -> &'static str {
        match self {
            Target::Project => "project",
            Target::User => "user",
            Target::Owner => "owner",
            Target::Members => "members",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FaultId {
    InputValidation1,
    InputValidation2,
    InputValidation3,
    Logic(Target),
    WrongField(Target),
    WrongType(Target),
}

impl FaultId {
    pub fn all() -> Vec<FaultId> {
        let mut out = vec![
            FaultId::InputValidation1,
            FaultId::InputValidation2,
            FaultId::InputValidation3,
        ];
        for make in [FaultId::Logic, FaultId::WrongField, FaultId::WrongType] {
            out.extend(Target::ALL.into_iter().map(make));
        }
        out
    }

    /// Whether any of the response properties can observe the fault.
    /// Wrong-field faults produce well-formed empty results.
    pub fn observable(self) -> bool {
        !matches!(self, FaultId::WrongField(_))
    }
}

impl fmt::Display for FaultId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultId::InputValidation1 => f.write_str("input-validation-1"),
            FaultId::InputValidation2 => f.write_str("input-validation-2"),
            FaultId::InputValidation3 => f.write_str("input-validation-3"),
            FaultId::Logic(t) => write!(f, "logic-{}", t.as_str()),
            FaultId::WrongField(t) => write!(f, "wrong-field-{}", t.as_str()),
            FaultId::WrongType(t) => write!(f, "wrong-type-{}", t.as_str()),
        }
    }
}

impl FromStr for FaultId {
    type Err = String;

    /// Accepts `logic-owner` as well as `LOGIC_owner`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        FaultId::all()
            .into_iter()
            .find(|f| f.to_string() == norm)
            .ok_or_else(|| format!("unknown fault `{s}`"))
    }
}

impl From<FaultId> for String {
    fn from(f: FaultId) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for FaultId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Resolvers with hit counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolver {
    Project,
    Projects,
    User,
    Users,
    Owner,
    Members,
    UserProjects,
    Touch,
}

const RESOLVERS: usize = 8;

/// An HTTP-free response: status plus JSON body.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureResponse {
    pub status: u16,
    pub body: Value,
}

impl FixtureResponse {
    fn error(status: u16, message: impl Into<String>) -> Self {
        FixtureResponse {
            status,
            body: json!({"errors": [{"message": message.into()}]}),
        }
    }
}

/// The fixture service: fault set, hit counters and request handling.
/// Shared by the HTTP server and in-process callers.
#[derive(Debug, Default)]
pub struct Fixture {
    faults: BTreeSet<FaultId>,
    echo_headers: bool,
    hits: [AtomicU64; RESOLVERS],
    received: Mutex<Vec<BTreeMap<String, String>>>,
}

impl Fixture {
    pub fn new(faults: impl IntoIterator<Item = FaultId>) -> Self {
        Fixture {
            faults: faults.into_iter().collect(),
            ..Fixture::default()
        }
    }

    /// Record request headers and echo them under `extensions.headers`.
    pub fn with_echo_headers(mut self, echo: bool) -> Self {
        self.echo_headers = echo;
        self
    }

    pub fn faults(&self) -> &BTreeSet<FaultId> {
        &self.faults
    }

    pub fn has(&self, fault: FaultId) -> bool {
        self.faults.contains(&fault)
    }

    pub fn hits(&self, resolver: Resolver) -> u64 {
        self.hits[resolver as usize].load(Ordering::Relaxed)
    }

    pub fn reset_hits(&self) {
        for h in &self.hits {
            h.store(0, Ordering::Relaxed);
        }
    }

    fn hit(&self, resolver: Resolver) {
        self.hits[resolver as usize].fetch_add(1, Ordering::Relaxed);
    }

    /// Headers of every request seen so far, names lowercased. Only
    /// recorded with echo enabled.
    pub fn received_headers(&self) -> Vec<BTreeMap<String, String>> {
        self.received.lock().expect("header log poisoned").clone()
    }

    /// Handle a raw POST body (`{"query": ...}`).
    pub fn handle_body(&self, body: &str, headers: &[(String, String)]) -> FixtureResponse {
        let headers: BTreeMap<String, String> = headers
            .iter()
            .map(|(k, v)| (k.to_ascii_lowercase(), v.clone()))
            .collect();
        if self.echo_headers {
            self.received
                .lock()
                .expect("header log poisoned")
                .push(headers.clone());
        }
        let query = match serde_json::from_str::<Value>(body) {
            Ok(Value::Object(obj)) => match obj.get("query") {
                Some(Value::String(q)) => q.clone(),
                _ => return FixtureResponse::error(400, "request body has no `query` string"),
            },
            _ => return FixtureResponse::error(400, "request body is not a JSON object"),
        };
        let mut response = self.execute_query(&query);
        if self.echo_headers {
            if let Value::Object(obj) = &mut response.body {
                obj.insert("extensions".to_owned(), json!({ "headers": headers }));
            }
        }
        response
    }

    /// Execute query text directly.
    pub fn execute_query(&self, query: &str) -> FixtureResponse {
        exec::execute(self, query)
    }
}

impl Executor for Fixture {
    fn execute(&self, query: &str) -> ExecutionResult {
        let start = Instant::now();
        let response = self.execute_query(query);
        ExecutionResult::response(response.status, response.body, start.elapsed())
    }
}

/// Field-path generators that draw ids from the fixture dataset, so that
/// nested resolvers get to run.
///
/// Covers `Query.user.id`, `Query.projects.ownerId` and
/// `Query.users.projectId`. `Query.project.id` is left to the built-in
/// String generator.
pub fn dataset_generator_recipe() -> GeneratorRegistry {
    GeneratorRegistry::from_toml(&dataset_recipe_toml()).expect("dataset recipe is valid")
}

/// [`dataset_generator_recipe`] in the `--generators` file format.
pub fn dataset_recipe_toml() -> String {
    let users = USERS.iter().map(|u| u.id).collect::<Vec<_>>().join("|");
    let projects = PROJECTS.iter().map(|p| p.id).collect::<Vec<_>>().join("|");
    format!(
        "[fields]\n\
         \"Query.user.id\" = \"<choice:{users}>\"\n\
         \"Query.projects.ownerId\" = \"<choice:{users}>\"\n\
         \"Query.users.projectId\" = \"<choice:{projects}>\"\n"
    )
}
