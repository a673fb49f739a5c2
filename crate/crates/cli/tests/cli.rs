use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qlcheck::fixture::{
    dataset_recipe_toml, fixture_schema, introspection, FaultId, Fixture, FixtureServer, Target,
};
use qlcheck::schema::parse_introspection;
use qlcheck::synthesis::parse_document;
use qlcheck::TestReport;
use serde_json::Value;

fn qlcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlcheck"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn server(faults: &[FaultId]) -> FixtureServer {
    FixtureServer::start(
        0,
        Fixture::new(faults.iter().copied()).with_echo_headers(true),
    )
    .unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn introspect_round_trip_forwards_headers() {
    let srv = server(&[]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/schema.json");
    let o = qlcheck(&[
        "introspect",
        "--endpoint",
        &srv.url(),
        "--header",
        "Authorization: Bearer t0ken",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out);
    assert_eq!(&doc, introspection());
    assert_eq!(&parse_introspection(&doc).unwrap(), fixture_schema());
    let seen = srv.fixture().received_headers();
    assert!(seen
        .iter()
        .any(|h| h.get("authorization").map(String::as_str) == Some("Bearer t0ken")));
}

#[test]
fn introspect_bad_url_aborts() {
    assert_eq!(
        code(&qlcheck(&[
            "introspect",
            "--endpoint",
            "http://127.0.0.1:1/graphql",
            "--timeout",
            "2"
        ])),
        2
    );
    assert_eq!(
        code(&qlcheck(&["introspect", "--endpoint", "not a url"])),
        2
    );
}

#[test]
fn run_without_faults_passes() {
    let srv = server(&[]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = qlcheck(&[
        "run",
        "--endpoint",
        &srv.url(),
        "--tests",
        "100",
        "--seed",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: TestReport = serde_json::from_value(read_json(&out)).unwrap();
    assert!(report.failures.is_empty());
    assert_eq!(report.config.num_tests, 100);
    let extra: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(extra.len(), 1, "no repro files expected");
}

#[test]
fn crash_fault_fails_with_repro() {
    let srv = server(&[FaultId::Logic(Target::Project)]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = qlcheck(&[
        "run",
        "--endpoint",
        &srv.url(),
        "--tests",
        "300",
        "--seed",
        "1",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let repro = dir.path().join("report.no_server_error.graphql");
    let text = fs::read_to_string(&repro).unwrap();
    assert!(text.starts_with("# property: NO_SERVER_ERROR"));
    let parsed = parse_document(&text).unwrap();
    assert_eq!(parsed.roots[0].name, "project");
    let crash = Fixture::new([FaultId::Logic(Target::Project)]).execute_query(&text);
    assert_eq!(crash.status, 500);
}

#[test]
fn invalid_invocations_abort() {
    let srv = server(&[]);
    let url = srv.url();
    for args in [
        vec!["run", "--endpoint", &url, "--tests", "0"],
        vec!["run", "--endpoint", &url, "--charset", "ebcdic"],
        vec!["run", "--endpoint", &url, "--properties", "NOPE"],
        vec!["run", "--endpoint", &url, "--header", "no-colon"],
        vec!["run", "--endpoint", &url, "--timeout", "-1"],
        vec!["run", "--endpoint", &url, "--repeat", "0"],
        vec!["run", "--tests", "5"],
        vec!["run", "--endpoint", &url, "--bogus"],
        vec![
            "run",
            "--endpoint",
            "http://127.0.0.1:1/graphql",
            "--timeout",
            "1",
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&qlcheck(&args)), 2, "{args:?}");
    }
}

#[test]
fn flags_override_config_file() {
    let srv = server(&[]);
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("qlcheck.toml");
    fs::write(
        &config,
        format!(
            "endpoint = \"{}\"\ntests = 7\nseed = 5\nmax-fields = 3\ncharset = \"full-byte\"\nout = \"r.json\"\n\
             header = [\"X-Trace: file\"]\n",
            srv.url()
        ),
    )
    .unwrap();
    let o = qlcheck(&[
        "run",
        "--config",
        p(&config),
        "--tests",
        "4",
        "--header",
        "X-Trace: flag",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // `out` is relative to the config file.
    let report: TestReport = serde_json::from_value(read_json(&dir.path().join("r.json"))).unwrap();
    assert_eq!(report.config.num_tests, 4);
    assert_eq!(report.config.seed, 5);
    assert_eq!(report.config.max_fields, 3);
    assert_eq!(report.config.charset, qlcheck::CharsetMode::FullByte);
    assert_eq!(report.config.headers["X-Trace"], "flag");
    assert!(report.queries.len() <= 4);

    let json_cfg = dir.path().join("qlcheck.json");
    fs::write(
        &json_cfg,
        format!(r#"{{"endpoint": "{}", "tests": 2, "bogus": 1}}"#, srv.url()),
    )
    .unwrap();
    assert_eq!(code(&qlcheck(&["run", "--config", p(&json_cfg)])), 2);
}

#[test]
fn runs_are_reproducible() {
    let srv = server(&[FaultId::WrongType(Target::User)]);
    let dir = tempfile::tempdir().unwrap();
    let recipe = dir.path().join("recipe.toml");
    fs::write(&recipe, dataset_recipe_toml()).unwrap();
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = qlcheck(&[
            "run",
            "--endpoint",
            &srv.url(),
            "--tests",
            "150",
            "--seed",
            "17",
            "--charset",
            "full-byte",
            "--generators",
            p(&recipe),
            "--workers",
            "3",
            "--out",
            p(&out),
        ]);
        assert_eq!(code(&o), 1);
        let r: TestReport = serde_json::from_value(read_json(&out)).unwrap();
        reports.push(serde_json::to_string(&r.without_latency()).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn schema_file_skips_introspection() {
    let srv = server(&[]);
    let dir = tempfile::tempdir().unwrap();
    let schema = dir.path().join("schema.json");
    fs::write(&schema, serde_json::to_string(introspection()).unwrap()).unwrap();
    let out = dir.path().join("r.json");
    let o = qlcheck(&[
        "run",
        "--endpoint",
        &srv.url(),
        "--schema",
        p(&schema),
        "--tests",
        "20",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(srv.fixture().received_headers().len(), 20);
}

#[test]
fn repeat_merges_coverage() {
    let srv = server(&[]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("repeat.json");
    let o = qlcheck(&[
        "run",
        "--endpoint",
        &srv.url(),
        "--tests",
        "50",
        "--size-fixed",
        "10",
        "--repeat",
        "3",
        "--merge-coverage",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out);
    let runs = doc["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let seeds: BTreeSet<_> = runs
        .iter()
        .map(|r| r["config"]["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds.len(), 3);
    let merged = doc["merged_coverage"]["covered_size"].as_u64().unwrap();
    let best = runs
        .iter()
        .map(|r| r["coverage"]["covered_size"].as_u64().unwrap())
        .max()
        .unwrap();
    assert!(merged >= best);

    let report = qlcheck(&["report", p(&out)]);
    assert_eq!(code(&report), 0);
    assert!(String::from_utf8_lossy(&report.stdout).contains("run 3"));
}

#[test]
fn report_exit_code_follows_report() {
    let srv = server(&[FaultId::InputValidation1]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(
        code(&qlcheck(&[
            "run",
            "--endpoint",
            &srv.url(),
            "--tests",
            "100",
            "--out",
            p(&out)
        ])),
        1
    );
    let o = qlcheck(&["report", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL NO_SERVER_ERROR"));
    assert_eq!(
        code(&qlcheck(&["report", p(&dir.path().join("missing.json"))])),
        2
    );
}

fn coverage(schema: &Path, corpus: &Path, extra: &[&str]) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cov.json");
    let mut args = vec![
        "coverage",
        "--schema",
        p(schema),
        "--corpus",
        p(corpus),
        "--out",
        p(&out),
    ];
    args.extend_from_slice(extra);
    let o = qlcheck(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    read_json(&out)
}

#[test]
fn offline_coverage_of_person_pet() {
    let corpus = tempfile::tempdir().unwrap();
    let schema = data("person_pet.json");
    let empty = coverage(&schema, corpus.path(), &["--include-roots", "false"]);
    assert_eq!(empty["covered_size"], 0);
    assert_eq!(empty["percent"], 0.0);

    fs::write(corpus.path().join("q.graphql"), "{ person { name age } }\n").unwrap();
    fs::write(corpus.path().join("ignored.txt"), "{ nonsense").unwrap();
    let csv = corpus.path().join("cov.csv");
    let r = coverage(
        &schema,
        corpus.path(),
        &["--include-roots", "false", "--csv", p(&csv)],
    );
    assert_eq!(r["universe_size"], 3);
    assert_eq!(r["covered_size"], 2);
    assert!((r["percent"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(
        r["uncovered"],
        serde_json::json!([{"object_type": "Pet", "field": "name"}])
    );
    assert!(fs::read_to_string(&csv)
        .unwrap()
        .contains("Person,age,true"));

    let with_roots = coverage(&schema, corpus.path(), &[]);
    assert_eq!(with_roots["universe_size"], 4);
    assert_eq!(with_roots["covered_size"], 3);
}

/// One query per reachable `(type, field)`, selecting just that field
/// along a shortest path from the query root.
fn enumerate_single_field_queries(doc: &Value) -> Vec<String> {
    let schema = &doc["__schema"];
    let types: Vec<&Value> = schema["types"].as_array().unwrap().iter().collect();
    let find = |name: &str| types.iter().find(|t| t["name"] == name).copied();
    let named = |mut ty: &Value| {
        while ty["name"].is_null() {
            ty = &ty["ofType"];
        }
        ty["name"].as_str().unwrap().to_owned()
    };
    let call = |f: &Value| {
        let args: Vec<String> = f["args"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|a| a["type"]["kind"] == "NON_NULL")
            .map(|a| format!("{}: \"1\"", a["name"].as_str().unwrap()))
            .collect();
        let name = f["name"].as_str().unwrap();
        if args.is_empty() {
            name.to_owned()
        } else {
            format!("{name}({})", args.join(", "))
        }
    };
    let root = schema["queryType"]["name"].as_str().unwrap().to_owned();
    // BFS over object types, remembering the field path used to reach each.
    let mut paths = vec![(root.clone(), Vec::<String>::new())];
    let mut queue = VecDeque::from([(root, Vec::<String>::new())]);
    let mut seen = BTreeSet::new();
    while let Some((ty, path)) = queue.pop_front() {
        if !seen.insert(ty.clone()) {
            continue;
        }
        for f in find(&ty).unwrap()["fields"].as_array().unwrap() {
            let target = named(&f["type"]);
            if find(&target).is_some_and(|t| t["kind"] == "OBJECT") && !seen.contains(&target) {
                let mut next = path.clone();
                next.push(call(f));
                paths.push((target.clone(), next.clone()));
                queue.push_back((target, next));
            }
        }
    }
    let mut out = Vec::new();
    let mut done = BTreeSet::new();
    for (ty, path) in paths {
        if !done.insert(ty.clone()) {
            continue;
        }
        for f in find(&ty).unwrap()["fields"].as_array().unwrap() {
            let target = named(&f["type"]);
            let leaf = if find(&target).is_some_and(|t| t["kind"] == "OBJECT") {
                format!("{} {{ __typename }}", call(f))
            } else {
                call(f)
            };
            let mut q = leaf;
            for step in path.iter().rev() {
                q = format!("{step} {{ {q} }}");
            }
            out.push(format!("{{ {q} }}"));
        }
    }
    out
}

#[test]
fn enumerated_corpus_covers_everything() {
    let dir = tempfile::tempdir().unwrap();
    let schema = dir.path().join("fixture.json");
    fs::write(&schema, serde_json::to_string(introspection()).unwrap()).unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    let queries = enumerate_single_field_queries(introspection());
    for (i, q) in queries.iter().enumerate() {
        fs::write(corpus.join(format!("{i:03}.graphql")), q).unwrap();
    }
    let filters = dir.path().join("filters.txt");
    fs::write(&filters, "# mutations are not enumerated\nMutation.touch\n").unwrap();
    let r = coverage(&schema, &corpus, &["--filter-tuples", p(&filters)]);
    assert_eq!(r["percent"], 1.0, "{r}");
    assert_eq!(r["universe_size"], 13);
}
