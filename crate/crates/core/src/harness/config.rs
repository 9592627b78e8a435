use std::path::PathBuf;

use crate::cache::Capacity;
use crate::kv::{KeyValues, KvError};

use super::gen::GenParams;

/// How each query execution is isolated from the previous one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Isolation {
    /// A fresh engine instance in this process.
    Fresh,
    /// A separate `query` subprocess of the given binary.
    Process,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndpointKind {
    /// A local HTTP server on an ephemeral port.
    Http,
    /// In-process request handling, no sockets.
    Local,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub max_mpr: Vec<usize>,
    pub page_size: Vec<usize>,
    pub clients: usize,
    pub timeout_ms: u64,
    pub duration_ms: u64,
    pub capacities: Vec<Capacity>,
    /// Capacities of the caching proxy in the cache experiment's throughput runs.
    pub proxy_capacities: Vec<Capacity>,
    /// maxMpR used by brTPF clients in throughput runs.
    pub throughput_max_mpr: usize,
    /// Page size used by throughput runs.
    pub throughput_page_size: usize,
    /// Write measured wall times; when off they are written as 0 so that
    /// output files are reproducible.
    pub record_timing: bool,
    pub endpoint: EndpointKind,
    pub isolation: Isolation,
    /// Binary used in process isolation mode.
    pub binary: Option<PathBuf>,
    /// Existing dataset and query files; generated from `gen` when absent.
    pub data: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    /// Restrict the sweep and throughput runs to multi-pattern queries.
    pub join_only: bool,
    pub gen: GenParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            max_mpr: (1..=10).map(|i| i * 5).collect(),
            page_size: vec![100],
            clients: 4,
            timeout_ms: 300_000,
            duration_ms: 60_000,
            capacities: [2_500, 5_000, 10_000, 50_000, 100_000, 250_000, 500_000]
                .into_iter()
                .filter_map(Capacity::bounded)
                .chain([Capacity::Unlimited])
                .collect(),
            proxy_capacities: vec![Capacity::Unlimited],
            throughput_max_mpr: 30,
            throughput_page_size: 100,
            record_timing: true,
            endpoint: EndpointKind::Http,
            isolation: Isolation::Fresh,
            binary: None,
            data: None,
            queries: None,
            join_only: false,
            gen: GenParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub const KEYS: &'static [&'static str] = &[
        "seed",
        "maxMpR",
        "pageSize",
        "clients",
        "timeoutMs",
        "durationMs",
        "capacities",
        "proxyCapacities",
        "throughputMaxMpR",
        "throughputPageSize",
        "recordTiming",
        "endpoint",
        "isolation",
        "binary",
        "data",
        "queries",
        "joinOnly",
        "dataSize",
        "queryCount",
        "fanout",
        "skew",
        "constantPool",
    ];

    pub fn from_kv(kv: &KeyValues) -> Result<Self, KvError> {
        kv.check_known(Self::KEYS)?;
        let mut c = Self::default();
        macro_rules! set {
            ($field:expr, $key:literal) => {
                if let Some(v) = kv.get($key)? {
                    $field = v;
                }
            };
        }
        macro_rules! set_list {
            ($field:expr, $key:literal) => {
                if let Some(v) = kv.get_list($key)? {
                    $field = v;
                }
            };
        }
        set!(c.seed, "seed");
        set_list!(c.max_mpr, "maxMpR");
        set_list!(c.page_size, "pageSize");
        set_list!(c.capacities, "capacities");
        set_list!(c.proxy_capacities, "proxyCapacities");
        set!(c.clients, "clients");
        set!(c.timeout_ms, "timeoutMs");
        set!(c.duration_ms, "durationMs");
        set!(c.throughput_max_mpr, "throughputMaxMpR");
        set!(c.throughput_page_size, "throughputPageSize");
        set!(c.record_timing, "recordTiming");
        set!(c.join_only, "joinOnly");
        set!(c.gen.size, "dataSize");
        set!(c.gen.queries, "queryCount");
        set!(c.gen.fanout, "fanout");
        set!(c.gen.skew, "skew");
        set!(c.gen.constant_pool, "constantPool");
        if let Some(v) = kv.get_str("endpoint") {
            c.endpoint = match v {
                "http" => EndpointKind::Http,
                "local" => EndpointKind::Local,
                other => return Err(KvError::Invalid { key: "endpoint".into(), value: other.into() }),
            };
        }
        if let Some(v) = kv.get_str("isolation") {
            c.isolation = match v {
                "fresh" => Isolation::Fresh,
                "process" => Isolation::Process,
                other => return Err(KvError::Invalid { key: "isolation".into(), value: other.into() }),
            };
        }
        c.binary = kv.get_str("binary").map(PathBuf::from);
        c.data = kv.get_str("data").map(PathBuf::from);
        c.queries = kv.get_str("queries").map(PathBuf::from);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), KvError> {
        let bad = |key: &str, value: String| Err(KvError::Invalid { key: key.into(), value });
        if self.max_mpr.is_empty() || self.max_mpr.contains(&0) {
            return bad("maxMpR", format!("{:?}", self.max_mpr));
        }
        if self.page_size.is_empty() || self.page_size.contains(&0) {
            return bad("pageSize", format!("{:?}", self.page_size));
        }
        if self.clients == 0 {
            return bad("clients", "0".into());
        }
        if self.throughput_max_mpr == 0 {
            return bad("throughputMaxMpR", "0".into());
        }
        if self.throughput_page_size == 0 {
            return bad("throughputPageSize", "0".into());
        }
        if self.data.is_some() != self.queries.is_some() {
            return bad("data/queries", "both or neither must be given".into());
        }
        Ok(())
    }
}
