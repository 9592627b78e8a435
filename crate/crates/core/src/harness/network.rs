use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::Duration;

use crate::client::{format_queries, BgpQuery, Endpoint, Engine, ExecOptions, RecordingEndpoint, RunMetrics};

use super::config::{ExperimentConfig, Isolation};
use super::testbed::Testbed;
use super::{metrics_csv_row, parse_metrics_csv, HarnessError};

pub const NETWORK_CSV_HEADER: &str = "engine,maxMpR,pageSize,query,numRequests,dataRecv,wallTimeMs,resultCount,timedOut";
pub const SUMMARY_CSV_HEADER: &str = "engine,maxMpR,pageSize,subset,queries,numRequests,dataRecv,resultCount,timeouts";
pub const COMPARISON_CSV_HEADER: &str = "maxMpR,pageSize,metric,better,same,worse";

type Metric = fn(&RunMetrics) -> u64;

/// One query execution in the sweep.
#[derive(Clone, Debug)]
pub struct QueryRun {
    pub engine: Engine,
    pub page_size: usize,
    pub query: String,
    pub patterns: usize,
    pub metrics: RunMetrics,
}

/// Canonical request URIs issued by one (engine, pageSize) configuration.
#[derive(Clone, Debug)]
pub struct Trace {
    pub engine: Engine,
    pub page_size: usize,
    pub requests: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct NetworkReport {
    pub runs: Vec<QueryRun>,
    /// Empty in process isolation mode.
    pub traces: Vec<Trace>,
    /// Queries whose result counts differ between engines.
    pub mismatches: Vec<String>,
}

/// Sums over a set of runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Totals {
    pub queries: u64,
    pub num_requests: u64,
    pub data_recv: u64,
    pub result_count: u64,
    pub timeouts: u64,
}

impl NetworkReport {
    /// Totals for `engine` at `page_size`, optionally only over multi-pattern queries.
    pub fn totals(&self, engine: Engine, page_size: usize, join_only: bool) -> Totals {
        let mut t = Totals::default();
        for r in self.runs.iter().filter(|r| r.engine == engine && r.page_size == page_size) {
            if join_only && r.patterns < 2 {
                continue;
            }
            t.queries += 1;
            t.num_requests += r.metrics.num_requests;
            t.data_recv += r.metrics.data_recv;
            t.result_count += r.metrics.result_count;
            t.timeouts += r.metrics.timed_out as u64;
        }
        t
    }

    pub fn trace(&self, engine: Engine, page_size: usize) -> Option<&Trace> {
        self.traces.iter().find(|t| t.engine == engine && t.page_size == page_size)
    }

    pub fn csv(&self, record_timing: bool) -> String {
        let mut out = format!("{NETWORK_CSV_HEADER}\n");
        for r in &self.runs {
            writeln!(out, "{}", metrics_csv_row(r.engine, r.page_size, &r.query, &r.metrics, record_timing)).unwrap();
        }
        out
    }

    fn configurations(&self) -> Vec<(Engine, usize)> {
        let mut seen = Vec::new();
        for r in &self.runs {
            if !seen.contains(&(r.engine, r.page_size)) {
                seen.push((r.engine, r.page_size));
            }
        }
        seen
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_CSV_HEADER}\n");
        for (engine, page_size) in self.configurations() {
            for (subset, join_only) in [("all", false), ("join", true)] {
                let t = self.totals(engine, page_size, join_only);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    engine.name(),
                    engine.max_mpr().unwrap_or(0),
                    page_size,
                    subset,
                    t.queries,
                    t.num_requests,
                    t.data_recv,
                    t.result_count,
                    t.timeouts
                )
                .unwrap();
            }
        }
        out
    }

    /// Per-query comparison of every brTPF configuration against TPF at the
    /// same page size: how many queries needed fewer, equal or more requests
    /// and received triples.
    pub fn comparison_csv(&self) -> String {
        let mut out = format!("{COMPARISON_CSV_HEADER}\n");
        let tpf: BTreeMap<(usize, &str), &RunMetrics> = self
            .runs
            .iter()
            .filter(|r| r.engine == Engine::Tpf)
            .map(|r| ((r.page_size, r.query.as_str()), &r.metrics))
            .collect();
        for (engine, page_size) in self.configurations() {
            let Some(max_mpr) = engine.max_mpr() else { continue };
            let metrics: [(&str, Metric); 2] = [("numRequests", |m| m.num_requests), ("dataRecv", |m| m.data_recv)];
            for (name, get) in metrics {
                let (mut better, mut same, mut worse) = (0, 0, 0);
                for r in self.runs.iter().filter(|r| r.engine == engine && r.page_size == page_size) {
                    let Some(base) = tpf.get(&(page_size, r.query.as_str())) else { continue };
                    match get(&r.metrics).cmp(&get(base)) {
                        std::cmp::Ordering::Less => better += 1,
                        std::cmp::Ordering::Equal => same += 1,
                        std::cmp::Ordering::Greater => worse += 1,
                    }
                }
                writeln!(out, "{max_mpr},{page_size},{name},{better},{same},{worse}").unwrap();
            }
        }
        out
    }

    pub fn write(&self, dir: &Path, record_timing: bool) -> std::io::Result<()> {
        std::fs::write(dir.join("network.csv"), self.csv(record_timing))?;
        std::fs::write(dir.join("network_summary.csv"), self.summary_csv())?;
        std::fs::write(dir.join("network_comparison.csv"), self.comparison_csv())
    }
}

/// The engines of a sweep: TPF once, then brTPF at every maxMpR.
pub fn sweep_engines(config: &ExperimentConfig) -> Vec<Engine> {
    std::iter::once(Engine::Tpf).chain(config.max_mpr.iter().map(|&max_mpr| Engine::Brtpf { max_mpr })).collect()
}

/// Runs every query with every engine and page size, one fresh engine per query.
pub fn run_network_sweep(
    config: &ExperimentConfig,
    testbed: &mut Testbed,
    queries: &[BgpQuery],
) -> Result<NetworkReport, HarnessError> {
    let mut report = NetworkReport::default();
    let timeout = Duration::from_millis(config.timeout_ms);
    for &page_size in &config.page_size {
        for engine in sweep_engines(config) {
            let runs = match config.isolation {
                Isolation::Fresh => {
                    let recorder = RecordingEndpoint::new(testbed.endpoint(page_size)?);
                    let runs = queries
                        .iter()
                        .map(|q| run_fresh(engine, page_size, q, &recorder, timeout))
                        .collect::<Result<Vec<_>, _>>()?;
                    report.traces.push(Trace { engine, page_size, requests: recorder.take_trace() });
                    runs
                }
                Isolation::Process => {
                    let url = testbed.url(page_size)?;
                    queries
                        .iter()
                        .map(|q| run_process(config, engine, page_size, q, &url))
                        .collect::<Result<Vec<_>, _>>()?
                }
            };
            report.runs.extend(runs);
        }
    }
    report.mismatches = find_mismatches(&report.runs);
    Ok(report)
}

fn run_fresh(
    engine: Engine,
    page_size: usize,
    query: &BgpQuery,
    endpoint: &dyn Endpoint,
    timeout: Duration,
) -> Result<QueryRun, HarnessError> {
    let metrics = match engine.execute(query, endpoint, &ExecOptions::default().with_timeout(timeout)) {
        Ok(exec) => exec.metrics,
        Err(f) if f.metrics.timed_out => f.metrics,
        Err(f) => return Err(HarnessError::Query { query: query.name.clone(), engine: engine.to_string(), source: f.error }),
    };
    Ok(QueryRun { engine, page_size, query: query.name.clone(), patterns: query.patterns.len(), metrics })
}

/// Runs one query in a child `query` process and reads back its metrics file.
fn run_process(
    config: &ExperimentConfig,
    engine: Engine,
    page_size: usize,
    query: &BgpQuery,
    url: &str,
) -> Result<QueryRun, HarnessError> {
    let binary = match &config.binary {
        Some(b) => b.clone(),
        None => std::env::current_exe()?,
    };
    let dir = tempfile::tempdir()?;
    let query_file = dir.path().join("query.txt");
    let metrics_file = dir.path().join("metrics.csv");
    std::fs::write(&query_file, format_queries(std::slice::from_ref(query)))?;
    let mut cmd = Command::new(binary);
    cmd.arg("query")
        .arg("--engine")
        .arg(engine.name())
        .arg("--endpoint")
        .arg(url)
        .arg("--query")
        .arg(&query_file)
        .arg("--metrics")
        .arg(&metrics_file)
        .arg("--timeout-ms")
        .arg(config.timeout_ms.to_string());
    if let Some(m) = engine.max_mpr() {
        cmd.arg("--max-mpr").arg(m.to_string());
    }
    let output = cmd.output()?;
    // Exit code 2 with a metrics row is a timeout; anything else is fatal.
    let rows = std::fs::read_to_string(&metrics_file).ok().map(|t| parse_metrics_csv(&t)).transpose()?;
    match rows.and_then(|r| r.into_iter().next()) {
        Some(metrics) if output.status.success() || metrics.timed_out => {
            Ok(QueryRun { engine, page_size, query: query.name.clone(), patterns: query.patterns.len(), metrics })
        }
        _ => Err(HarnessError::Subprocess(format!(
            "query {} ({engine}) exited with {}: {}",
            query.name,
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        ))),
    }
}

fn find_mismatches(runs: &[QueryRun]) -> Vec<String> {
    let mut expected: BTreeMap<&str, (u64, String)> = BTreeMap::new();
    let mut out = Vec::new();
    for r in runs.iter().filter(|r| !r.metrics.timed_out) {
        let label = format!("{} pageSize={}", r.engine, r.page_size);
        match expected.get(r.query.as_str()) {
            None => {
                expected.insert(&r.query, (r.metrics.result_count, label));
            }
            Some((count, first)) if *count != r.metrics.result_count => out.push(format!(
                "{}: {first} returned {count} results, {label} returned {}",
                r.query, r.metrics.result_count
            )),
            Some(_) => {}
        }
    }
    out
}
