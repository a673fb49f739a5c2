//! The `qlcheck` command line.
//!
//! Exit codes: 0 when every property held, 1 when at least one failed, 2
//! for configuration, schema or transport problems that stop a run.

pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use qlcheck::coverage::{parse_filter_list, query_tuples, CoverageState};
use qlcheck::runner::{self, fetch_introspection, HttpExecutor, PropertyId, RunConfig, TestReport};
use qlcheck::schema::parse_introspection;
use qlcheck::synthesis::parse_document;
use qlcheck::{CharsetMode, CoverageReport, GeneratorRegistry, SchemaModel};

use config::FileConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ABORT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qlcheck",
    version,
    about = "Property-based testing for GraphQL APIs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fetch the schema of an endpoint through introspection.
    Introspect(IntrospectArgs),
    /// Generate, execute and check queries.
    Run(Box<RunArgs>),
    /// Measure schema coverage of a directory of .graphql files.
    Coverage(CoverageArgs),
    /// Summarize a saved run report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IntrospectArgs {
    #[arg(long)]
    pub endpoint: String,
    /// Extra request header, `Name: value`. Repeatable.
    #[arg(long = "header", value_name = "K:V")]
    pub headers: Vec<String>,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub timeout: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Flat key-value config file (TOML, or JSON with a .json extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Introspection JSON to use instead of introspecting the endpoint.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Number of queries per run.
    #[arg(long)]
    pub tests: Option<u32>,
    #[arg(long)]
    pub max_size: Option<u32>,
    /// Use one size for every query instead of ramping up to --max-size.
    #[arg(long)]
    pub size_fixed: Option<u32>,
    #[arg(long)]
    pub max_fields: Option<u32>,
    #[arg(long)]
    pub max_iterations: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub include_mutations: bool,
    /// `alnum` or `full-byte`.
    #[arg(long)]
    pub charset: Option<String>,
    /// Comma-separated property ids.
    #[arg(long, value_delimiter = ',')]
    pub properties: Vec<String>,
    /// File of `Type.field` tuples to leave out of coverage.
    #[arg(long)]
    pub filter_tuples: Option<PathBuf>,
    #[arg(long, value_name = "BOOL")]
    pub include_roots: Option<bool>,
    /// Extra request header, `Name: value`. Repeatable.
    #[arg(long = "header", value_name = "K:V")]
    pub headers: Vec<String>,
    #[arg(long)]
    pub workers: Option<u32>,
    /// Request timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Report file; stdout when absent. Repro .graphql files go next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run this many times with consecutive seeds.
    #[arg(long)]
    pub repeat: Option<u32>,
    /// Report coverage merged over the repeated runs.
    #[arg(long)]
    pub merge_coverage: bool,
    /// Generator recipes (TOML with [types] and [fields] tables).
    #[arg(long)]
    pub generators: Option<PathBuf>,
    /// Strict conformance and generation: IDs and custom scalars must be
    /// strings, requested fields must be present, unknown scalars are an
    /// error.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub schema: PathBuf,
    /// Directory of .graphql files.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub filter_tuples: Option<PathBuf>,
    #[arg(long, value_name = "BOOL", default_value_t = true, action = clap::ArgAction::Set)]
    pub include_roots: bool,
    /// Also write a per-tuple CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub file: PathBuf,
}

/// Fully resolved `run` settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub run: RunConfig,
    pub schema: Option<PathBuf>,
    pub generators: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub repeat: u32,
    pub merge_coverage: bool,
}

/// Output of `run --repeat N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatReport {
    pub runs: Vec<TestReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merged_coverage: Option<CoverageReport>,
    /// First run after which merged coverage was complete.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs_to_full_coverage: Option<u32>,
}

fn parse_headers(raw: &[String]) -> Result<BTreeMap<String, String>> {
    raw.iter()
        .map(|h| {
            let (k, v) = h
                .split_once(':')
                .ok_or_else(|| anyhow!("header `{h}` is not `Name: value`"))?;
            let k = k.trim();
            if k.is_empty() {
                bail!("header `{h}` has an empty name");
            }
            Ok((k.to_owned(), v.trim().to_owned()))
        })
        .collect()
}

fn parse_properties(raw: &[String]) -> Result<BTreeSet<PropertyId>> {
    raw.iter()
        .flat_map(|p| p.split(','))
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.parse::<PropertyId>().map_err(|e| anyhow!(e)))
        .collect()
}

fn timeout_ms(secs: f64) -> Result<u64> {
    if !(secs.is_finite() && secs > 0.0) {
        bail!("timeout must be a positive number of seconds");
    }
    Ok((secs * 1000.0).round().max(1.0) as u64)
}

/// Merge flags over the config file over defaults.
pub fn resolve_run(args: &RunArgs) -> Result<RunSettings> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let d = RunConfig::default();
    let charset = match args.charset.as_ref().or(file.charset.as_ref()) {
        Some(c) => c.parse::<CharsetMode>().map_err(|e| anyhow!(e))?,
        None => d.charset,
    };
    let properties = if !args.properties.is_empty() {
        parse_properties(&args.properties)?
    } else if let Some(p) = &file.properties {
        parse_properties(p)?
    } else {
        d.enabled_properties.clone()
    };
    let mut headers = parse_headers(file.header.as_deref().unwrap_or_default())?;
    headers.extend(parse_headers(&args.headers)?);
    let filters = match args.filter_tuples.as_ref().or(file.filter_tuples.as_ref()) {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_filter_list(&text)?
        }
        None => BTreeSet::new(),
    };
    let timeout_ms = match args.timeout.or(file.timeout) {
        Some(s) => timeout_ms(s)?,
        None => d.timeout_ms,
    };
    let run = RunConfig {
        endpoint: args.endpoint.clone().or(file.endpoint).unwrap_or_default(),
        num_tests: args.tests.or(file.tests).unwrap_or(d.num_tests),
        max_size: args.max_size.or(file.max_size).unwrap_or(d.max_size),
        size_fixed: args.size_fixed.or(file.size_fixed),
        max_fields: args.max_fields.or(file.max_fields).unwrap_or(d.max_fields),
        max_iterations: args
            .max_iterations
            .or(file.max_iterations)
            .unwrap_or(d.max_iterations),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        include_mutations: args.include_mutations
            || file.include_mutations.unwrap_or(d.include_mutations),
        charset,
        enabled_properties: properties,
        headers,
        timeout_ms,
        workers: args.workers.or(file.workers).unwrap_or(d.workers),
        strict: args.strict || file.strict.unwrap_or(d.strict),
        include_roots: args
            .include_roots
            .or(file.include_roots)
            .unwrap_or(d.include_roots),
        filters,
    };
    run.validate()?;
    let repeat = args.repeat.or(file.repeat).unwrap_or(1);
    if repeat == 0 {
        bail!("--repeat must be at least 1");
    }
    let schema = args.schema.clone().or(file.schema);
    if run.endpoint.is_empty() {
        bail!("--endpoint is required for `run`");
    }
    Ok(RunSettings {
        run,
        schema,
        generators: args.generators.clone().or(file.generators),
        out: args.out.clone().or(file.out),
        repeat,
        merge_coverage: args.merge_coverage || file.merge_coverage.unwrap_or(false),
    })
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_schema(path: &Path) -> Result<SchemaModel> {
    Ok(parse_introspection(&read_json(path)?)?)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
        }
        _ => Ok(()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn cmd_introspect(args: &IntrospectArgs) -> Result<i32> {
    let headers = parse_headers(&args.headers)?;
    let executor = HttpExecutor::new(
        &args.endpoint,
        headers,
        Duration::from_millis(timeout_ms(args.timeout)?),
    );
    let data = fetch_introspection(&executor).map_err(|e| anyhow!("introspection failed: {e}"))?;
    parse_introspection(&data).context("endpoint returned an unusable schema")?;
    let mut text = serde_json::to_string_pretty(&data)?;
    text.push('\n');
    write_output(args.out.as_deref(), &text)?;
    Ok(EXIT_PASS)
}

fn repro_path(out: &Path, report_index: Option<usize>, property: PropertyId) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let name = match report_index {
        Some(i) => format!(
            "{stem}.run{i}.{}.graphql",
            property.as_str().to_ascii_lowercase()
        ),
        None => format!("{stem}.{}.graphql", property.as_str().to_ascii_lowercase()),
    };
    out.with_file_name(name)
}

fn write_repros(
    report: &TestReport,
    out: &Path,
    report_index: Option<usize>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    ensure_parent(out)?;
    for f in &report.failures {
        let path = repro_path(out, report_index, f.property);
        let mut text = format!(
            "# property: {}\n# detail: {}\n# seed: {} (query #{})\n# original: {}\n",
            f.property,
            f.detail.replace('\n', " "),
            report.config.seed,
            f.index,
            f.original_query
        );
        text.push_str(&f.shrunk_query);
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let settings = resolve_run(args)?;
    let cfg = &settings.run;
    let schema = match &settings.schema {
        Some(path) => load_schema(path)?,
        None => {
            let executor = HttpExecutor::new(&cfg.endpoint, cfg.headers.clone(), cfg.timeout());
            let data =
                fetch_introspection(&executor).map_err(|e| anyhow!("introspection failed: {e}"))?;
            parse_introspection(&data)?
        }
    };
    let registry = match &settings.generators {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            GeneratorRegistry::from_toml(&text)?
        }
        None => GeneratorRegistry::new(),
    };

    let mut reports = Vec::new();
    let mut merged: Option<CoverageState> = None;
    let mut runs_to_full = None;
    for r in 0..settings.repeat {
        let mut run_cfg = cfg.clone();
        run_cfg.seed = cfg.seed.wrapping_add(r as u64);
        let report = runner::run(&run_cfg, &schema, &registry)?;
        eprint!("{}", report.summary());
        let next = match merged.take() {
            Some(m) => m.merge(&report.coverage_state)?,
            None => report.coverage_state.clone(),
        };
        if runs_to_full.is_none() && next.is_complete() {
            runs_to_full = Some(r + 1);
        }
        merged = Some(next);
        reports.push(report);
    }

    let exit = reports
        .iter()
        .map(TestReport::exit_code)
        .max()
        .unwrap_or(EXIT_PASS);
    let repeated = settings.repeat > 1;
    if let Some(out) = &settings.out {
        for (i, report) in reports.iter().enumerate() {
            for path in write_repros(report, out, repeated.then_some(i))? {
                eprintln!("repro written to {}", path.display());
            }
        }
    }
    let mut text = if repeated || settings.merge_coverage {
        let merged_coverage = settings
            .merge_coverage
            .then(|| merged.as_ref().map(CoverageState::report))
            .flatten();
        if let Some(m) = &merged_coverage {
            eprintln!(
                "merged coverage {:.2}% ({}/{}) over {} run(s)",
                m.percent * 100.0,
                m.covered_size,
                m.universe_size,
                reports.len()
            );
        }
        serde_json::to_string_pretty(&RepeatReport {
            runs: reports,
            merged_coverage,
            runs_to_full_coverage: if settings.merge_coverage {
                runs_to_full
            } else {
                None
            },
        })?
    } else {
        serde_json::to_string_pretty(&reports[0])?
    };
    text.push('\n');
    write_output(settings.out.as_deref(), &text)?;
    Ok(exit)
}

/// Coverage of every `.graphql`/`.gql` file in `dir`, files read in name
/// order.
pub fn corpus_coverage(
    schema: &SchemaModel,
    dir: &Path,
    state: &mut CoverageState,
) -> Result<usize> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "graphql" || e == "gql"));
    files.sort();
    for path in &files {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let parsed =
            parse_document(&text).with_context(|| format!("parsing {}", path.display()))?;
        for root in &parsed.roots {
            state.record(&query_tuples(root, parsed.operation, schema));
        }
    }
    Ok(files.len())
}

pub fn cmd_coverage(args: &CoverageArgs) -> Result<i32> {
    let schema = load_schema(&args.schema)?;
    let filters = match &args.filter_tuples {
        Some(path) => parse_filter_list(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )?,
        None => BTreeSet::new(),
    };
    let mut state = CoverageState::for_schema(&schema, filters, args.include_roots);
    let files = corpus_coverage(&schema, &args.corpus, &mut state)?;
    let report = state.report();
    eprintln!(
        "{} file(s): coverage {:.2}% ({}/{})",
        files,
        report.percent * 100.0,
        report.covered_size,
        report.universe_size
    );
    if let Some(csv) = &args.csv {
        fs::write(csv, state.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    }
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(args.out.as_deref(), &text)?;
    Ok(EXIT_PASS)
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let value = read_json(&args.file)?;
    let reports: Vec<TestReport> = if value.get("runs").is_some() {
        serde_json::from_value::<RepeatReport>(value)?.runs
    } else {
        vec![serde_json::from_value(value)?]
    };
    let mut stdout = std::io::stdout().lock();
    for (i, r) in reports.iter().enumerate() {
        if reports.len() > 1 {
            writeln!(stdout, "run {} (seed {})", i + 1, r.config.seed)?;
        }
        stdout.write_all(r.summary().as_bytes())?;
    }
    Ok(reports
        .iter()
        .map(TestReport::exit_code)
        .max()
        .unwrap_or(EXIT_PASS))
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Introspect(a) => cmd_introspect(a),
        Command::Run(a) => cmd_run(a),
        Command::Coverage(a) => cmd_coverage(a),
        Command::Report(a) => cmd_report(a),
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_ABORT
            } else {
                EXIT_PASS
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ABORT
        }
    }
}
