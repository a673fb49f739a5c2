//! Shared inputs for the benchmarks.

use qlcheck::fixture::fixture_schema;
use qlcheck::{CharsetMode, GenContext, SchemaModel, SynthesisConfig};

pub fn schema() -> &'static SchemaModel {
    fixture_schema()
}

pub fn synthesis(max_fields: u32, size: u32) -> SynthesisConfig {
    SynthesisConfig {
        max_fields,
        max_iterations: 10,
        size,
        include_mutations: false,
    }
}

pub fn context(index: u64, size: u32) -> GenContext {
    GenContext::for_test(7, index, size, CharsetMode::FullByte)
}
