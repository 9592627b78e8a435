//! Request-level cache simulation and a caching HTTP proxy.
//!
//! Keys are canonical request URIs. The same key always maps to the same
//! response body, so a cache never needs invalidation.

mod proxy;

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::hash::Hash;
use std::num::NonZeroUsize;
use std::path::Path;
use std::str::FromStr;

use lru::LruCache;

pub use proxy::{CachingProxy, ProxyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Capacity {
    Unlimited,
    Bounded(NonZeroUsize),
}

impl Capacity {
    pub fn bounded(n: usize) -> Option<Self> {
        NonZeroUsize::new(n).map(Capacity::Bounded)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Unlimited => f.write_str("unlimited"),
            Capacity::Bounded(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid cache capacity {0:?}: expected a positive integer or \"unlimited\"")]
pub struct CapacityParseError(String);

impl FromStr for Capacity {
    type Err = CapacityParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unlimited") {
            return Ok(Capacity::Unlimited);
        }
        s.parse::<usize>().ok().and_then(Capacity::bounded).ok_or_else(|| CapacityParseError(s.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

impl CacheStats {
    pub fn total(&self) -> u64 {
        self.hits + self.misses
    }

    /// 0 when nothing was observed.
    pub fn hit_rate(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.hits as f64 / self.total() as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Hit,
    Miss,
}

enum Entries<K: Hash + Eq, V> {
    Unlimited(HashMap<K, V>),
    Bounded(LruCache<K, V>),
}

/// Key-value store with unlimited or LRU-bounded capacity.
pub(crate) struct Store<K: Hash + Eq, V> {
    entries: Entries<K, V>,
}

impl<K: Hash + Eq, V> Store<K, V> {
    pub(crate) fn new(capacity: Capacity) -> Self {
        let entries = match capacity {
            Capacity::Unlimited => Entries::Unlimited(HashMap::new()),
            Capacity::Bounded(n) => Entries::Bounded(LruCache::new(n)),
        };
        Self { entries }
    }

    /// Looks `key` up, marking it most recently used.
    pub(crate) fn get(&mut self, key: &K) -> Option<&V> {
        match &mut self.entries {
            Entries::Unlimited(m) => m.get(key),
            Entries::Bounded(c) => c.get(key),
        }
    }

    /// Inserts, evicting the least recently used entry when full.
    pub(crate) fn put(&mut self, key: K, value: V) {
        match &mut self.entries {
            Entries::Unlimited(m) => {
                m.insert(key, value);
            }
            Entries::Bounded(c) => {
                c.put(key, value);
            }
        }
    }

    pub(crate) fn len(&self) -> usize {
        match &self.entries {
            Entries::Unlimited(m) => m.len(),
            Entries::Bounded(c) => c.len(),
        }
    }
}

/// Hit/miss classification of a key stream.
pub struct CacheModel {
    capacity: Capacity,
    store: Store<String, ()>,
    stats: CacheStats,
}

impl CacheModel {
    pub fn new(capacity: Capacity) -> Self {
        Self { capacity, store: Store::new(capacity), stats: CacheStats::default() }
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity
    }

    pub fn observe(&mut self, key: &str) -> Outcome {
        if self.store.get(&key.to_owned()).is_some() {
            self.stats.hits += 1;
            Outcome::Hit
        } else {
            self.store.put(key.to_owned(), ());
            self.stats.misses += 1;
            Outcome::Miss
        }
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One independent simulation per capacity over the same trace.
pub fn replay<S: AsRef<str>>(trace: &[S], capacities: &[Capacity]) -> Vec<(Capacity, CacheStats)> {
    capacities
        .iter()
        .map(|&capacity| {
            let mut model = CacheModel::new(capacity);
            for key in trace {
                model.observe(key.as_ref());
            }
            (capacity, model.stats())
        })
        .collect()
}

pub fn distinct_requests<S: AsRef<str>>(trace: &[S]) -> usize {
    trace.iter().map(AsRef::as_ref).collect::<std::collections::HashSet<&str>>().len()
}

pub const STATS_CSV_HEADER: &str = "capacity,hits,misses,hitRate";

pub fn stats_csv(rows: &[(Capacity, CacheStats)]) -> String {
    let mut out = format!("{STATS_CSV_HEADER}\n");
    for (capacity, s) in rows {
        writeln!(out, "{capacity},{},{},{:.6}", s.hits, s.misses, s.hit_rate()).unwrap();
    }
    out
}

pub fn write_trace(path: impl AsRef<Path>, trace: &[String]) -> std::io::Result<()> {
    let mut text = trace.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    std::fs::write(path, text)
}

pub fn read_trace(path: impl AsRef<Path>) -> std::io::Result<Vec<String>> {
    Ok(std::fs::read_to_string(path)?.lines().filter(|l| !l.is_empty()).map(str::to_owned).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cap(n: usize) -> Capacity {
        Capacity::bounded(n).unwrap()
    }

    #[test]
    fn repeat_hits() {
        let mut m = CacheModel::new(cap(1));
        assert_eq!(m.observe("a"), Outcome::Miss);
        assert_eq!(m.observe("a"), Outcome::Hit);
    }

    #[test]
    fn lru_eviction() {
        let mut m = CacheModel::new(cap(1));
        let outcomes: Vec<_> = ["a", "b", "a"].iter().map(|k| m.observe(k)).collect();
        assert_eq!(outcomes, vec![Outcome::Miss; 3]);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn hit_refreshes_recency() {
        let mut m = CacheModel::new(cap(2));
        for k in ["a", "b", "a", "c"] {
            m.observe(k);
        }
        // "b" was least recently used and got evicted.
        assert_eq!(m.observe("a"), Outcome::Hit);
        assert_eq!(m.observe("b"), Outcome::Miss);
    }

    #[test]
    fn capacity_parsing_and_csv() {
        assert_eq!("unlimited".parse::<Capacity>().unwrap(), Capacity::Unlimited);
        assert_eq!("25".parse::<Capacity>().unwrap(), cap(25));
        assert!("0".parse::<Capacity>().is_err());
        let rows = replay(&["a", "a", "b"], &[Capacity::Unlimited, cap(1)]);
        assert_eq!(stats_csv(&rows), "capacity,hits,misses,hitRate\nunlimited,1,2,0.333333\n1,1,2,0.333333\n");
    }

    fn trace() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec((0u8..12).prop_map(|k| format!("/k{k}")), 0..200)
    }

    proptest! {
        #[test]
        fn unlimited_identity(t in trace()) {
            let s = replay(&t, &[Capacity::Unlimited])[0].1;
            prop_assert_eq!(s.hits as usize, t.len() - distinct_requests(&t));
            prop_assert_eq!(s.total() as usize, t.len());
        }

        #[test]
        fn hits_monotone_and_flatten(t in trace()) {
            let caps: Vec<Capacity> = (1..=14).map(cap).collect();
            let rows = replay(&t, &caps);
            for w in rows.windows(2) {
                prop_assert!(w[0].1.hits <= w[1].1.hits);
            }
            let unlimited = replay(&t, &[Capacity::Unlimited])[0].1;
            let distinct = distinct_requests(&t).max(1);
            for (c, s) in &rows {
                if let Capacity::Bounded(n) = c {
                    if n.get() >= distinct {
                        prop_assert_eq!(s.hits, unlimited.hits);
                    }
                }
            }
        }

        #[test]
        fn bounded_size(t in trace(), n in 1usize..6) {
            let mut m = CacheModel::new(cap(n));
            for k in &t {
                m.observe(k);
                prop_assert!(m.len() <= n);
            }
        }
    }
}
