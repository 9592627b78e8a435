//! Experiment driver: network-load sweeps, multi-client throughput, and
//! cache analysis, plus the brute-force oracle and workload generator.

mod config;
mod gen;
mod network;
mod oracle;
mod testbed;
mod throughput;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use crate::cache::{replay, stats_csv, write_trace, CacheStats, CachingProxy, Capacity, ProxyError, STATS_CSV_HEADER};
use crate::client::{load_queries, BgpQuery, ClientError, Engine, HttpEndpoint, QueryFileError, RunMetrics};
use crate::kv::KvError;
use crate::server::ServerError;
use crate::store::{Dataset, LoadError};

pub use config::{EndpointKind, ExperimentConfig, Isolation};
pub use gen::{gen_workload, join_queries, shared_pattern_fraction, to_ntriples, GenParams, Workload, NS};
pub use network::{
    run_network_sweep, sweep_engines, NetworkReport, QueryRun, Totals, Trace, COMPARISON_CSV_HEADER,
    NETWORK_CSV_HEADER, SUMMARY_CSV_HEADER,
};
pub use oracle::{normalize, oracle_bgp, OracleTooLarge, ORACLE_GUARD};
pub use testbed::Testbed;
pub use throughput::{assign_queries, throughput_csv, ThroughputReport, ThroughputRun, THROUGHPUT_CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Server(#[from] ServerError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("query {query} with {engine}: {source}")]
    Query { query: String, engine: String, source: ClientError },
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    QueryFile(#[from] QueryFileError),
    #[error(transparent)]
    Proxy(#[from] ProxyError),
    #[error("subprocess: {0}")]
    Subprocess(String),
    #[error("malformed metrics file: {0}")]
    Metrics(String),
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl From<KvError> for HarnessError {
    fn from(e: KvError) -> Self {
        HarnessError::Config(ConfigError::Kv(e))
    }
}

impl HarnessError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(ConfigError::Invalid(msg.into()))
    }
}

/// Formats one metrics row in the network sweep schema.
pub fn metrics_csv_row(engine: Engine, page_size: usize, query: &str, m: &RunMetrics, record_timing: bool) -> String {
    let wall = if record_timing { format!("{:.3}", m.wall_time_ms()) } else { "0".into() };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        engine.name(),
        engine.max_mpr().unwrap_or(0),
        page_size,
        query,
        m.num_requests,
        m.data_recv,
        wall,
        m.result_count,
        m.timed_out
    )
}

/// Reads the metrics of a CSV in the network sweep schema.
pub fn parse_metrics_csv(text: &str) -> Result<Vec<RunMetrics>, HarnessError> {
    let mut lines = text.lines();
    if lines.next() != Some(NETWORK_CSV_HEADER) {
        return Err(HarnessError::Metrics("missing header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let bad = || HarnessError::Metrics(line.to_owned());
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad());
            }
            let wall_ms: f64 = f[6].parse().map_err(|_| bad())?;
            Ok(RunMetrics {
                num_requests: f[4].parse().map_err(|_| bad())?,
                data_recv: f[5].parse().map_err(|_| bad())?,
                wall_time: Duration::from_secs_f64(wall_ms.max(0.0) / 1000.0),
                result_count: f[7].parse().map_err(|_| bad())?,
                timed_out: f[8].parse().map_err(|_| bad())?,
                cartesian_steps: 0,
            })
        })
        .collect()
}

/// The dataset and query list of an experiment: loaded from the configured
/// files, or generated from the seed.
pub fn load_workload(config: &ExperimentConfig) -> Result<(Arc<Dataset>, Vec<BgpQuery>), HarnessError> {
    let (dataset, queries) = match (&config.data, &config.queries) {
        (Some(data), Some(queries)) => (Dataset::load_file(data)?, load_queries(queries)?),
        (None, None) => {
            let w = gen_workload(config.seed, &config.gen);
            (Dataset::from_triples(w.triples)?, w.queries)
        }
        _ => return Err(HarnessError::config("data and queries must be given together")),
    };
    let queries = if config.join_only { join_queries(&queries) } else { queries };
    if queries.is_empty() {
        return Err(HarnessError::config("the workload has no queries"));
    }
    Ok((Arc::new(dataset), queries))
}

fn server_max_mpr(config: &ExperimentConfig) -> usize {
    config.max_mpr.iter().copied().chain([config.throughput_max_mpr]).max().unwrap_or(1)
}

pub fn testbed_for(config: &ExperimentConfig, dataset: Arc<Dataset>) -> Testbed {
    let kind = if config.isolation == Isolation::Process { EndpointKind::Http } else { config.endpoint };
    Testbed::new(dataset, kind, server_max_mpr(config))
}

fn trace_label(engine: Engine, page_size: usize) -> String {
    match engine.max_mpr() {
        Some(m) => format!("{}_mpr{m}_ps{page_size}", engine.name()),
        None => format!("{}_ps{page_size}", engine.name()),
    }
}

/// `bench network`: sweep CSVs into `out`.
pub fn bench_network(config: &ExperimentConfig, out: &Path) -> Result<NetworkReport, HarnessError> {
    std::fs::create_dir_all(out)?;
    let (dataset, queries) = load_workload(config)?;
    let mut testbed = testbed_for(config, dataset);
    let report = run_network_sweep(config, &mut testbed, &queries)?;
    report.write(out, config.record_timing)?;
    Ok(report)
}

/// The two throughput engines of an experiment.
pub fn throughput_engines(config: &ExperimentConfig) -> [Engine; 2] {
    [Engine::Tpf, Engine::Brtpf { max_mpr: config.throughput_max_mpr }]
}

/// `bench throughput`: one report per engine, without a cache.
pub fn bench_throughput(config: &ExperimentConfig, out: &Path) -> Result<Vec<ThroughputReport>, HarnessError> {
    std::fs::create_dir_all(out)?;
    let (dataset, queries) = load_workload(config)?;
    let mut testbed = testbed_for(config, dataset);
    let endpoint = testbed.endpoint(config.throughput_page_size)?;
    let mut reports = Vec::new();
    for engine in throughput_engines(config) {
        let run = ThroughputRun {
            engine,
            clients: config.clients,
            cache_label: "none".into(),
            window: Duration::from_millis(config.duration_ms),
            timeout: Duration::from_millis(config.timeout_ms),
            queries: &queries,
        };
        reports.push(run.run(endpoint.clone())?);
    }
    std::fs::write(out.join("throughput.csv"), throughput_csv(&reports))?;
    Ok(reports)
}

/// Replay of one recorded trace over every configured capacity.
#[derive(Debug)]
pub struct TraceReplay {
    pub label: String,
    pub requests: usize,
    pub distinct: usize,
    pub rows: Vec<(Capacity, CacheStats)>,
}

/// Results of the cache experiment.
#[derive(Debug)]
pub struct CacheReport {
    pub network: NetworkReport,
    pub replays: Vec<TraceReplay>,
    pub throughput: Vec<ThroughputReport>,
    /// Hit statistics of the caching proxy per throughput run behind it.
    pub proxy_stats: Vec<(Engine, Capacity, CacheStats)>,
}

/// `bench cache`: records request traces during a sweep, replays them over
/// every capacity, and compares throughput with and without a caching proxy.
pub fn bench_cache(config: &ExperimentConfig, out: &Path) -> Result<CacheReport, HarnessError> {
    std::fs::create_dir_all(out)?;
    let (dataset, queries) = load_workload(config)?;
    let sweep_config = ExperimentConfig { isolation: Isolation::Fresh, ..config.clone() };
    let mut testbed = testbed_for(&sweep_config, dataset);
    let network = run_network_sweep(&sweep_config, &mut testbed, &queries)?;

    let mut replays = Vec::new();
    let mut summary = String::from("engine,maxMpR,pageSize,requests,distinct,unlimitedHits\n");
    for trace in &network.traces {
        let label = trace_label(trace.engine, trace.page_size);
        let rows = replay(&trace.requests, &config.capacities);
        let distinct = crate::cache::distinct_requests(&trace.requests);
        let unlimited = replay(&trace.requests, &[Capacity::Unlimited])[0].1;
        writeln!(
            summary,
            "{},{},{},{},{distinct},{}",
            trace.engine.name(),
            trace.engine.max_mpr().unwrap_or(0),
            trace.page_size,
            trace.requests.len(),
            unlimited.hits
        )
        .unwrap();
        std::fs::write(out.join(format!("cache_{label}.csv")), stats_csv(&rows))?;
        write_trace(out.join(format!("trace_{label}.txt")), &trace.requests)?;
        replays.push(TraceReplay { label, requests: trace.requests.len(), distinct, rows });
    }
    std::fs::write(out.join("cache_summary.csv"), summary)?;

    let mut throughput = Vec::new();
    let mut proxy_stats = Vec::new();
    let origin = testbed.url(config.throughput_page_size)?;
    let window = Duration::from_millis(config.duration_ms);
    let timeout = Duration::from_millis(config.timeout_ms);
    for engine in throughput_engines(config) {
        let run = |label: String| ThroughputRun { engine, clients: config.clients, cache_label: label, window, timeout, queries: &queries };
        throughput.push(run("none".into()).run(Arc::new(HttpEndpoint::new(&origin)?))?);
        for &capacity in &config.proxy_capacities {
            let proxy = CachingProxy::start(&origin, capacity, "127.0.0.1:0".parse().expect("literal address"))?;
            throughput.push(run(capacity.to_string()).run(Arc::new(HttpEndpoint::new(&proxy.url())?))?);
            proxy_stats.push((engine, capacity, proxy.stats()));
            proxy.shutdown()?;
        }
    }
    std::fs::write(out.join("cache_throughput.csv"), throughput_csv(&throughput))?;
    let mut proxy_csv = format!("engine,{STATS_CSV_HEADER}\n");
    for (engine, capacity, s) in &proxy_stats {
        writeln!(proxy_csv, "{},{capacity},{},{},{:.6}", engine.name(), s.hits, s.misses, s.hit_rate()).unwrap();
    }
    std::fs::write(out.join("cache_proxy.csv"), proxy_csv)?;
    Ok(CacheReport { network, replays, throughput, proxy_stats })
}
