use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::client::{BgpQuery, ClientError, Endpoint, Engine, ExecOptions, RecordingEndpoint};

use super::HarnessError;

pub const THROUGHPUT_CSV_HEADER: &str =
    "engine,clients,cache,completed,attempted,timeouts,throughputCompleted,throughputAll,qetMeanMs,qetStdevMs";

#[derive(Clone, Debug, PartialEq)]
pub struct ThroughputReport {
    pub engine: Engine,
    pub clients: usize,
    /// Cache label, e.g. `none`, `unlimited` or a capacity.
    pub cache: String,
    pub completed: u64,
    pub timeouts: u64,
    /// Executions started, including those cut off by the end of the window.
    pub started: u64,
    /// Executions cut off by the end of the window; not attempted.
    pub discarded: u64,
    pub window: Duration,
    /// Wall times of completed executions in milliseconds.
    pub query_times_ms: Vec<f64>,
}

impl ThroughputReport {
    pub fn attempted(&self) -> u64 {
        self.completed + self.timeouts
    }

    fn per_hour(&self, n: u64) -> f64 {
        let secs = self.window.as_secs_f64();
        if secs == 0.0 {
            0.0
        } else {
            n as f64 * 3600.0 / secs
        }
    }

    /// Completed executions per hour, scaled from the window.
    pub fn throughput_completed(&self) -> f64 {
        self.per_hour(self.completed)
    }

    /// Attempted executions per hour, scaled from the window.
    pub fn throughput_all(&self) -> f64 {
        self.per_hour(self.attempted())
    }

    pub fn qet_mean_ms(&self) -> f64 {
        if self.query_times_ms.is_empty() {
            return 0.0;
        }
        self.query_times_ms.iter().sum::<f64>() / self.query_times_ms.len() as f64
    }

    /// Population standard deviation of completed query times.
    pub fn qet_stdev_ms(&self) -> f64 {
        let n = self.query_times_ms.len();
        if n == 0 {
            return 0.0;
        }
        let mean = self.qet_mean_ms();
        (self.query_times_ms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3}",
            self.engine.name(),
            self.clients,
            self.cache,
            self.completed,
            self.attempted(),
            self.timeouts,
            self.throughput_completed(),
            self.throughput_all(),
            self.qet_mean_ms(),
            self.qet_stdev_ms()
        )
    }
}

pub fn throughput_csv(reports: &[ThroughputReport]) -> String {
    let mut out = format!("{THROUGHPUT_CSV_HEADER}\n");
    for r in reports {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

/// Deals `queries` round-robin into `clients` disjoint lists.
pub fn assign_queries(queries: &[BgpQuery], clients: usize) -> Vec<Vec<BgpQuery>> {
    let mut out = vec![Vec::new(); clients];
    for (i, q) in queries.iter().enumerate() {
        out[i % clients].push(q.clone());
    }
    out
}

#[derive(Default)]
struct ClientTally {
    completed: u64,
    timeouts: u64,
    started: u64,
    discarded: u64,
    times_ms: Vec<f64>,
}

/// Runs `clients` concurrent clients for `window`. Each cycles through its
/// own query list in order; an execution that exceeds `timeout` is counted
/// as a timeout and the client moves on to its next query. Executions still
/// running when the window closes are discarded.
pub struct ThroughputRun<'a> {
    pub engine: Engine,
    pub clients: usize,
    pub cache_label: String,
    pub window: Duration,
    pub timeout: Duration,
    pub queries: &'a [BgpQuery],
}

impl ThroughputRun<'_> {
    pub fn run(&self, endpoint: Arc<dyn Endpoint>) -> Result<ThroughputReport, HarnessError> {
        self.run_recorded(endpoint).map(|(report, _)| report)
    }

    /// Like [`run`](Self::run), also returning the interleaved request trace.
    pub fn run_recorded(&self, endpoint: Arc<dyn Endpoint>) -> Result<(ThroughputReport, Vec<String>), HarnessError> {
        if self.clients == 0 {
            return Err(HarnessError::config("clients must be at least 1"));
        }
        let recorder = RecordingEndpoint::new(endpoint);
        let lists = assign_queries(self.queries, self.clients);
        let start = Instant::now();
        let window_end = start + self.window;
        let tallies: Vec<Result<ClientTally, HarnessError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = lists
                .iter()
                .map(|list| {
                    let recorder = &recorder;
                    scope.spawn(move || self.client_loop(list, recorder, window_end))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("client thread panicked")).collect()
        });
        let mut report = ThroughputReport {
            engine: self.engine,
            clients: self.clients,
            cache: self.cache_label.clone(),
            completed: 0,
            timeouts: 0,
            started: 0,
            discarded: 0,
            window: self.window,
            query_times_ms: Vec::new(),
        };
        for tally in tallies {
            let tally = tally?;
            report.completed += tally.completed;
            report.timeouts += tally.timeouts;
            report.started += tally.started;
            report.discarded += tally.discarded;
            report.query_times_ms.extend(tally.times_ms);
        }
        Ok((report, recorder.take_trace()))
    }

    fn client_loop(&self, list: &[BgpQuery], endpoint: &dyn Endpoint, window_end: Instant) -> Result<ClientTally, HarnessError> {
        let mut tally = ClientTally::default();
        if list.is_empty() {
            return Ok(tally);
        }
        for query in list.iter().cycle() {
            let now = Instant::now();
            if now >= window_end {
                break;
            }
            tally.started += 1;
            let timeout_at = now + self.timeout;
            let options = ExecOptions::default().with_deadline(timeout_at.min(window_end));
            match self.engine.execute(query, endpoint, &options) {
                Ok(exec) => {
                    if Instant::now() > window_end {
                        tally.discarded += 1;
                        break;
                    }
                    tally.completed += 1;
                    tally.times_ms.push(exec.metrics.wall_time_ms());
                }
                Err(f) if f.error == ClientError::Timeout => {
                    if timeout_at > window_end {
                        tally.discarded += 1;
                        break;
                    }
                    tally.timeouts += 1;
                }
                Err(f) => {
                    return Err(HarnessError::Query { query: query.name.clone(), engine: self.engine.to_string(), source: f.error })
                }
            }
        }
        Ok(tally)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::TriplePattern;

    fn report(completed: u64, timeouts: u64, times: Vec<f64>) -> ThroughputReport {
        ThroughputReport {
            engine: Engine::Tpf,
            clients: 2,
            cache: "none".into(),
            completed,
            timeouts,
            started: completed + timeouts,
            discarded: 0,
            window: Duration::from_secs(60),
            query_times_ms: times,
        }
    }

    #[test]
    fn scaling_and_stats() {
        let r = report(10, 2, vec![1.0, 3.0]);
        assert_eq!(r.attempted(), 12);
        assert_eq!(r.throughput_completed(), 600.0);
        assert_eq!(r.throughput_all(), 720.0);
        assert_eq!(r.qet_mean_ms(), 2.0);
        assert_eq!(r.qet_stdev_ms(), 1.0);
        assert_eq!(r.csv_row(), "tpf,2,none,10,12,2,600.000,720.000,2.000,1.000");
    }

    #[test]
    fn round_robin_assignment() {
        let q = |n: &str| BgpQuery::new(n, vec![TriplePattern::parse_line("?s ?p ?o").unwrap()]).unwrap();
        let qs = vec![q("a"), q("b"), q("c")];
        let lists = assign_queries(&qs, 2);
        assert_eq!(lists[0].iter().map(|q| q.name.as_str()).collect::<Vec<_>>(), ["a", "c"]);
        assert_eq!(lists[1].len(), 1);
        assert_eq!(assign_queries(&qs, 5)[4].len(), 0);
    }
}
