//! Serve the Project/User fixture over HTTP.

use std::io::Write;

use clap::Parser;
use qlcheck::fixture::{dataset_recipe_toml, introspection, FaultId, Fixture, FixtureServer};

#[derive(Debug, Parser)]
#[command(
    name = "qlcheck-fixture",
    version,
    about = "GraphQL fixture server with seedable faults"
)]
struct Args {
    /// Port on 127.0.0.1; 0 picks a free one.
    #[arg(long, default_value_t = 4000)]
    port: u16,
    /// Fault to seed, e.g. `logic-owner`. Repeatable.
    #[arg(long = "fault")]
    faults: Vec<FaultId>,
    /// Echo request headers under `extensions.headers`.
    #[arg(long)]
    echo_headers: bool,
    /// Print the dataset generator recipe and exit.
    #[arg(long)]
    print_recipe: bool,
    /// Print the introspection JSON and exit.
    #[arg(long)]
    print_schema: bool,
    /// List fault ids and exit.
    #[arg(long)]
    list_faults: bool,
}

fn main() {
    let args = Args::parse();
    if args.print_recipe {
        print!("{}", dataset_recipe_toml());
        return;
    }
    if args.print_schema {
        println!(
            "{}",
            serde_json::to_string_pretty(introspection()).expect("serializable")
        );
        return;
    }
    if args.list_faults {
        for f in FaultId::all() {
            println!("{f}");
        }
        return;
    }
    let fixture = Fixture::new(args.faults).with_echo_headers(args.echo_headers);
    let server = match FixtureServer::start(args.port, fixture) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot listen on port {}: {e}", args.port);
            std::process::exit(2);
        }
    };
    println!("listening on {}", server.url());
    let _ = std::io::stdout().flush();
    server.join();
}
