//! Schema-driven property-based testing for GraphQL APIs.
//!
//! The pipeline runs in six steps:
//!
//! 1. parse an introspection document into a [`SchemaModel`] and derive
//!    response specifications for every object type,
//! 2. draw a flat list of query nodes with sized, seeded generators
//!    ([`synthesis::generate_flat`]),
//! 3. clean the list and fold it into a [`QueryTree`],
//! 4. serialize the tree to GraphQL text,
//! 5. execute it against the endpoint,
//! 6. check the response against the enabled properties and record the
//!    object/field tuples it covers.
//!
//! [`runner::run`] drives the whole loop; [`fixture`] provides an in-process
//! GraphQL server with seedable faults for demos and tests.

pub mod coverage;
pub mod fixture;
pub mod generators;
pub mod runner;
pub mod schema;
pub mod synthesis;
pub mod value;

pub use coverage::{CoverageReport, CoverageState, CoverageTuple};
pub use generators::{CharsetMode, GenContext, GeneratorRegistry};
pub use runner::{ExecutionResult, Executor, PropertyId, PropertyVerdict, RunConfig, TestReport};
pub use schema::{Operation, ResponseSpecs, SchemaModel, TypeRef};
pub use synthesis::{FlatQuery, GenNode, NodeKind, QueryTree, SynthesisConfig};
pub use value::ArgValue;
