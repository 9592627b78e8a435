//! Client-side BGP engines over the fragment interface.
//!
//! Two engines share the same transport and instrumentation:
//! [`execute_tpf`] evaluates a BGP with plain triple pattern requests,
//! choosing the smallest fragment at every recursion level, while
//! [`execute_brtpf`] fixes a left-deep plan up front and ships chunks of
//! intermediate solutions to the server (a bind join).

mod brtpf;
mod endpoint;
mod plan;
mod query;
mod tpf;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::fragment::{BodyError, FragmentRequest, PageBody};
use crate::rdf::{SolutionMapping, Triple};

pub use brtpf::execute_brtpf;
pub use endpoint::{Endpoint, HttpEndpoint, LocalEndpoint, RecordingEndpoint};
pub use plan::{order_patterns, plan, QueryPlan};
pub use query::{format_queries, load_queries, parse_queries, BgpQuery, QueryFileError};
pub use tpf::execute_tpf;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("server rejected request with status {status}: {reason}")]
    Rejected { status: u16, reason: String },
    #[error(transparent)]
    Protocol(#[from] BodyError),
    #[error("query execution timed out")]
    Timeout,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Per-execution counters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunMetrics {
    /// Page requests issued (#req), planning requests included.
    pub num_requests: u64,
    /// Triples received: data plus metadata triples of every page.
    pub data_recv: u64,
    pub wall_time: Duration,
    pub timed_out: bool,
    pub result_count: u64,
    /// Join steps executed as a cartesian product.
    pub cartesian_steps: u32,
}

impl RunMetrics {
    pub fn wall_time_ms(&self) -> f64 {
        self.wall_time.as_secs_f64() * 1000.0
    }
}

#[derive(Clone, Debug)]
pub struct ExecOptions {
    /// Reuse page 1 responses fetched for cardinality estimates as data pages.
    pub reuse_planning_pages: bool,
    pub deadline: Option<Instant>,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self { reuse_planning_pages: true, deadline: None }
    }
}

impl ExecOptions {
    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.deadline = Some(Instant::now() + timeout);
        self
    }

    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub solutions: Vec<SolutionMapping>,
    pub metrics: RunMetrics,
}

/// An aborted execution together with the metrics gathered until the abort.
#[derive(Clone, Debug, thiserror::Error)]
#[error("{error}")]
pub struct ExecutionFailure {
    pub error: ClientError,
    pub metrics: RunMetrics,
}

pub type ExecResult = Result<Execution, ExecutionFailure>;

/// Request accounting and deadline checks for one execution.
struct Session<'a> {
    endpoint: &'a dyn Endpoint,
    metrics: RunMetrics,
    deadline: Option<Instant>,
    reuse: bool,
    started: Instant,
}

impl<'a> Session<'a> {
    fn new(endpoint: &'a dyn Endpoint, options: &ExecOptions) -> Self {
        Self {
            endpoint,
            metrics: RunMetrics::default(),
            deadline: options.deadline,
            reuse: options.reuse_planning_pages,
            started: Instant::now(),
        }
    }

    fn check_deadline(&self) -> Result<(), ClientError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(ClientError::Timeout),
            _ => Ok(()),
        }
    }

    fn fetch(&mut self, request: &FragmentRequest) -> Result<PageBody, ClientError> {
        self.check_deadline()?;
        self.metrics.num_requests += 1;
        let page = self.endpoint.fetch(request)?;
        self.metrics.data_recv += (page.data.len() + page.meta) as u64;
        Ok(page)
    }

    /// Data of `first` (page `request.page`) plus every following page.
    fn fetch_remaining(&mut self, request: &FragmentRequest, first: PageBody) -> Result<Vec<Triple>, ClientError> {
        let mut data = first.data;
        let mut has_next = first.has_next;
        let mut page = request.page;
        while has_next {
            page += 1;
            let next = self.fetch(&request.with_page(page))?;
            has_next = next.has_next;
            data.extend(next.data);
        }
        Ok(data)
    }

    fn fetch_all(&mut self, request: &FragmentRequest) -> Result<Vec<Triple>, ClientError> {
        let first = self.fetch(request)?;
        self.fetch_remaining(request, first)
    }

    fn finish(mut self, result: Result<Vec<SolutionMapping>, ClientError>) -> ExecResult {
        self.metrics.wall_time = self.started.elapsed();
        match result {
            Ok(solutions) => {
                let mut seen = HashSet::with_capacity(solutions.len());
                let solutions: Vec<_> = solutions.into_iter().filter(|s| seen.insert(s.clone())).collect();
                self.metrics.result_count = solutions.len() as u64;
                Ok(Execution { solutions, metrics: self.metrics })
            }
            Err(error) => {
                self.metrics.timed_out = error == ClientError::Timeout;
                Err(ExecutionFailure { error, metrics: self.metrics })
            }
        }
    }
}

/// The engine selector used by the harness and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Tpf,
    Brtpf { max_mpr: usize },
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Tpf => "tpf",
            Engine::Brtpf { .. } => "brtpf",
        }
    }

    pub fn max_mpr(&self) -> Option<usize> {
        match self {
            Engine::Tpf => None,
            Engine::Brtpf { max_mpr } => Some(*max_mpr),
        }
    }

    pub fn execute(&self, query: &BgpQuery, endpoint: &dyn Endpoint, options: &ExecOptions) -> ExecResult {
        match *self {
            Engine::Tpf => execute_tpf(query, endpoint, options),
            Engine::Brtpf { max_mpr } => execute_brtpf(query, endpoint, max_mpr, options),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Engine::Tpf => f.write_str("tpf"),
            Engine::Brtpf { max_mpr } => write!(f, "brtpf(maxMpR={max_mpr})"),
        }
    }
}
