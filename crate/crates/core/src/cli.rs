use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use brtpf::client::{load_queries, BgpQuery, Engine, ExecOptions, HttpEndpoint};
use brtpf::harness::{
    bench_cache, bench_network, bench_throughput, gen_workload, metrics_csv_row, normalize, oracle_bgp, to_ntriples,
    ExperimentConfig, GenParams, NETWORK_CSV_HEADER,
};
use brtpf::kv::KeyValues;
use brtpf::rdf::SolutionMapping;
use brtpf::server::{serve, ServerConfig};
use brtpf::store::Dataset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "brtpf", version, about = "TPF / brTPF server, clients and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Serve a dataset over HTTP
    Serve(ServeArgs),
    /// Evaluate BGP queries against a server
    Query(QueryArgs),
    /// Run an experiment
    Bench(BenchArgs),
    /// Write a synthetic dataset and query file
    GenData(GenArgs),
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// N-Triples file
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    page_size: Option<usize>,
    #[arg(long)]
    max_mpr: Option<usize>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    uri_limit: Option<usize>,
    /// key=value file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Tpf,
    Brtpf,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long, value_enum)]
    engine: EngineArg,
    /// Server base URL, e.g. http://127.0.0.1:8080
    #[arg(long)]
    endpoint: String,
    /// Query file
    #[arg(long)]
    query: PathBuf,
    /// Mappings per brTPF request
    #[arg(long, default_value_t = 30)]
    max_mpr: usize,
    /// Append per-query metrics as CSV to this file
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Check results against a brute-force evaluation over this N-Triples file
    #[arg(long)]
    verify: Option<PathBuf>,
    #[arg(long)]
    timeout_ms: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Experiment {
    Network,
    Throughput,
    Cache,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// key=value experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Approximate number of triples
    #[arg(long, default_value_t = 10_000)]
    size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Number of queries
    #[arg(long, default_value_t = 60)]
    queries: usize,
}

/// A failure and the exit code it maps to.
struct Failure(i32, String);

impl Failure {
    fn runtime(e: impl std::fmt::Display) -> Self {
        Failure(EXIT_RUNTIME, e.to_string())
    }

    fn usage(e: impl std::fmt::Display) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Serve(a) => cmd_serve(a),
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenData(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn cmd_serve(a: ServeArgs) -> Result<(), Failure> {
    let mut config = ServerConfig::default();
    if let Some(path) = &a.config {
        let kv = KeyValues::load(path).map_err(Failure::usage)?;
        config.apply_kv(&kv).map_err(Failure::usage)?;
    }
    if a.data.is_some() {
        config.data = a.data;
    }
    config.page_size = a.page_size.unwrap_or(config.page_size);
    config.max_mpr = a.max_mpr.unwrap_or(config.max_mpr);
    config.port = a.port.unwrap_or(config.port);
    config.uri_limit = a.uri_limit.unwrap_or(config.uri_limit);
    config.validate().map_err(Failure::usage)?;
    if config.data.is_none() {
        return Err(Failure::usage("--data is required"));
    }
    let handle = serve(&config).map_err(Failure::runtime)?;
    println!("listening on {}", handle.url());
    let _ = std::io::stdout().flush();
    handle.wait().map_err(Failure::runtime)
}

fn format_solution(mu: &SolutionMapping) -> String {
    mu.iter().map(|(v, t)| format!("{v}={t}")).collect::<Vec<_>>().join(" ")
}

fn cmd_query(a: QueryArgs) -> Result<(), Failure> {
    let engine = match a.engine {
        EngineArg::Tpf => Engine::Tpf,
        EngineArg::Brtpf if a.max_mpr == 0 => return Err(Failure::usage("--max-mpr must be at least 1")),
        EngineArg::Brtpf => Engine::Brtpf { max_mpr: a.max_mpr },
    };
    let queries = load_queries(&a.query).map_err(Failure::usage)?;
    let reference = match &a.verify {
        Some(path) => Some(Dataset::load_file(path).map_err(Failure::runtime)?),
        None => None,
    };
    let endpoint = HttpEndpoint::new(&a.endpoint).map_err(Failure::runtime)?;
    let mut rows = Vec::new();
    let mut failure = None;
    let mut mismatches = Vec::new();
    for query in &queries {
        let mut options = ExecOptions::default();
        if let Some(ms) = a.timeout_ms {
            options = options.with_timeout(Duration::from_millis(ms));
        }
        let (solutions, metrics) = match engine.execute(query, &endpoint, &options) {
            Ok(exec) => (exec.solutions, exec.metrics),
            Err(f) => {
                rows.push(metrics_csv_row(engine, 0, &query.name, &f.metrics, true));
                failure = Some(Failure::runtime(format!("query {}: {}", query.name, f.error)));
                break;
            }
        };
        let solutions = normalize(solutions);
        println!("# {}: {} solutions", query.name, solutions.len());
        for mu in &solutions {
            println!("{}", format_solution(mu));
        }
        println!(
            "# numRequests={} dataRecv={} wallTimeMs={:.3} resultCount={}",
            metrics.num_requests,
            metrics.data_recv,
            metrics.wall_time_ms(),
            metrics.result_count
        );
        rows.push(metrics_csv_row(engine, 0, &query.name, &metrics, true));
        if let Some(ds) = &reference {
            verify(ds, query, &solutions, &mut mismatches)?;
        }
    }
    if let Some(path) = &a.metrics {
        write_metrics(path, &rows).map_err(Failure::runtime)?;
    }
    if let Some(f) = failure {
        return Err(f);
    }
    if !mismatches.is_empty() {
        return Err(Failure(EXIT_VERIFY, format!("results differ from the reference for: {}", mismatches.join(", "))));
    }
    Ok(())
}

fn verify(ds: &Dataset, query: &BgpQuery, solutions: &[SolutionMapping], mismatches: &mut Vec<String>) -> Result<(), Failure> {
    let expected = oracle_bgp(ds, query).map_err(Failure::runtime)?;
    if expected != solutions {
        mismatches.push(query.name.clone());
    }
    Ok(())
}

/// Appends rows, writing the header first if the file is new or empty.
fn write_metrics(path: &Path, rows: &[String]) -> std::io::Result<()> {
    let needs_header = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    if needs_header {
        writeln!(file, "{NETWORK_CSV_HEADER}")?;
    }
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let mut kv = match &a.config {
        Some(path) => KeyValues::load(path).map_err(Failure::usage)?,
        None => KeyValues::default(),
    };
    if let Some(seed) = a.seed {
        kv.set("seed", seed.to_string());
    }
    let config = ExperimentConfig::from_kv(&kv).map_err(Failure::usage)?;
    match a.experiment {
        Experiment::Network => {
            let report = bench_network(&config, &a.out).map_err(Failure::runtime)?;
            print!("{}", report.summary_csv());
            if !report.mismatches.is_empty() {
                return Err(Failure(EXIT_VERIFY, format!("engines disagree: {}", report.mismatches.join("; "))));
            }
        }
        Experiment::Throughput => {
            let reports = bench_throughput(&config, &a.out).map_err(Failure::runtime)?;
            print!("{}", brtpf::harness::throughput_csv(&reports));
        }
        Experiment::Cache => {
            let report = bench_cache(&config, &a.out).map_err(Failure::runtime)?;
            for r in &report.replays {
                println!("{}: {} requests, {} distinct, {} unlimited-cache hits", r.label, r.requests, r.distinct, r.requests - r.distinct);
            }
            print!("{}", brtpf::harness::throughput_csv(&report.throughput));
        }
    }
    println!("wrote results to {}", a.out.display());
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let params = GenParams { size: a.size, queries: a.queries, ..GenParams::default() };
    let workload = gen_workload(a.seed, &params);
    std::fs::create_dir_all(&a.out).map_err(Failure::runtime)?;
    std::fs::write(a.out.join("dataset.nt"), to_ntriples(&workload.triples)).map_err(Failure::runtime)?;
    std::fs::write(a.out.join("queries.txt"), brtpf::client::format_queries(&workload.queries)).map_err(Failure::runtime)?;
    println!("wrote {} triples and {} queries to {}", workload.triples.len(), workload.queries.len(), a.out.display());
    Ok(())
}

