//! Config files for `qlcheck run`.
//!
//! A flat table whose keys are the long flag names:
//!
//! ```toml
//! endpoint = "http://localhost:4000/graphql"
//! tests = 2000
//! max-fields = 2
//! charset = "full-byte"
//! properties = ["NO_SERVER_ERROR", "NO_ERRORS_SECTION"]
//! header = ["Authorization: Bearer t0ken"]
//! ```
//!
//! Files ending in `.json` are read as JSON with the same keys. Flags given
//! on the command line win over file values.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub endpoint: Option<String>,
    pub schema: Option<PathBuf>,
    pub tests: Option<u32>,
    pub max_size: Option<u32>,
    pub size_fixed: Option<u32>,
    pub max_fields: Option<u32>,
    pub max_iterations: Option<u32>,
    pub seed: Option<u64>,
    pub include_mutations: Option<bool>,
    pub charset: Option<String>,
    pub properties: Option<Vec<String>>,
    pub filter_tuples: Option<PathBuf>,
    pub include_roots: Option<bool>,
    pub header: Option<Vec<String>>,
    pub workers: Option<u32>,
    pub timeout: Option<f64>,
    pub out: Option<PathBuf>,
    pub repeat: Option<u32>,
    pub merge_coverage: Option<bool>,
    pub generators: Option<PathBuf>,
    pub strict: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: FileConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        // Relative paths in the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.schema,
            &mut cfg.filter_tuples,
            &mut cfg.out,
            &mut cfg.generators,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
