mod common;

use std::sync::Arc;

use brtpf::cache::{distinct_requests, replay, CacheStats, CachingProxy, Capacity};
use brtpf::client::{parse_queries, Engine, ExecOptions, HttpEndpoint, LocalEndpoint, RecordingEndpoint};
use brtpf::fragment::FragmentRequest;
use brtpf::rdf::TriplePattern;
use brtpf::server::{serve_dataset, FragmentService, ServerConfig};
use brtpf::store::Dataset;

fn dataset() -> Arc<Dataset> {
    let mut text = String::new();
    for i in 0..30 {
        text.push_str(&format!("<urn:s{i}> <urn:p> <urn:o{}> .\n<urn:o{}> <urn:q> \"v{i}\" .\n", i % 7, i % 7));
    }
    Arc::new(Dataset::load(text.as_bytes()).unwrap())
}

fn get(url: &str) -> (u16, String) {
    let r = reqwest::blocking::get(url).unwrap();
    (r.status().as_u16(), r.text().unwrap())
}

#[test]
fn proxy_serves_identical_bodies_and_counts_hits() {
    let origin = serve_dataset(dataset(), &ServerConfig { page_size: 4, port: 0, ..ServerConfig::default() }).unwrap();
    let proxy = CachingProxy::start(&origin.url(), Capacity::Unlimited, "127.0.0.1:0".parse().unwrap()).unwrap();
    let uri = FragmentRequest::tpf(TriplePattern::parse_line("?s <urn:p> ?o").unwrap()).to_uri();
    let direct = get(&format!("{}{uri}", origin.url()));
    let first = get(&format!("{}{uri}", proxy.url()));
    let second = get(&format!("{}{uri}", proxy.url()));
    assert_eq!(direct, first);
    assert_eq!(first, second);
    assert_eq!(proxy.stats(), CacheStats { hits: 1, misses: 1 });

    // Parameter order does not matter: the key is the canonical URI.
    let (path, query) = uri.split_once('?').unwrap();
    let reordered = format!("{path}?{}", query.split('&').rev().collect::<Vec<_>>().join("&"));
    assert_ne!(reordered, uri);
    assert_eq!(get(&format!("{}{reordered}", proxy.url())), direct);
    assert_eq!(proxy.stats().hits, 2);

    // Errors pass through and are not cached.
    assert_eq!(get(&format!("{}/fragment?s=bad", proxy.url())).0, 400);
    assert_eq!(get(&format!("{}/fragment?s=bad", proxy.url())).0, 400);
    assert_eq!(get(&format!("{}/health", proxy.url())).0, 200);
    proxy.shutdown().unwrap();
}

#[test]
fn proxy_forwards_upstream_failure() {
    let origin = serve_dataset(dataset(), &ServerConfig { port: 0, ..ServerConfig::default() }).unwrap();
    let url = origin.url();
    origin.shutdown().unwrap();
    let proxy = CachingProxy::start(&url, Capacity::Unlimited, "127.0.0.1:0".parse().unwrap()).unwrap();
    let uri = FragmentRequest::tpf(TriplePattern::parse_line("?s ?p ?o").unwrap()).to_uri();
    assert_eq!(get(&format!("{}{uri}", proxy.url())).0, 502);
}

#[test]
fn engines_through_proxy_match_direct() {
    let origin = serve_dataset(dataset(), &ServerConfig { page_size: 4, port: 0, ..ServerConfig::default() }).unwrap();
    let proxy = CachingProxy::start(&origin.url(), Capacity::bounded(8).unwrap(), "127.0.0.1:0".parse().unwrap()).unwrap();
    let query = parse_queries("?s <urn:p> ?o .\n?o <urn:q> ?v .\n").unwrap().remove(0);
    for engine in [Engine::Tpf, Engine::Brtpf { max_mpr: 3 }] {
        let direct = engine.execute(&query, &HttpEndpoint::new(&origin.url()).unwrap(), &ExecOptions::default()).unwrap();
        for _ in 0..2 {
            let cached = engine.execute(&query, &HttpEndpoint::new(&proxy.url()).unwrap(), &ExecOptions::default()).unwrap();
            assert_eq!(cached.solutions, direct.solutions);
            assert_eq!(cached.metrics.data_recv, direct.metrics.data_recv);
        }
    }
    let stats = proxy.stats();
    assert!(stats.hits > 0);
}

#[test]
fn recorded_trace_identities() {
    // Two clients interleaving on one recorded endpoint.
    let ds = dataset();
    let service = FragmentService::new(ds, &ServerConfig { page_size: 4, ..ServerConfig::default() });
    let recorder = RecordingEndpoint::new(LocalEndpoint::new(service));
    let queries = parse_queries("?s <urn:p> ?o .\n?o <urn:q> ?v .\n\n?o <urn:q> ?v .\n\n?s <urn:p> <urn:o3> .\n").unwrap();
    std::thread::scope(|scope| {
        for engine in [Engine::Tpf, Engine::Brtpf { max_mpr: 5 }] {
            let (recorder, queries) = (&recorder, &queries);
            scope.spawn(move || {
                for q in queries.iter().chain(queries.iter()) {
                    engine.execute(q, recorder, &ExecOptions::default()).unwrap();
                }
            });
        }
    });
    let trace = recorder.take_trace();
    let distinct = distinct_requests(&trace);
    let caps = [Capacity::bounded(1).unwrap(), Capacity::bounded(distinct).unwrap(), Capacity::Unlimited];
    let rows = replay(&trace, &caps);
    assert_eq!(rows[2].1.hits as usize, trace.len() - distinct);
    assert_eq!(rows[1].1, rows[2].1);
    assert!(rows[0].1.hits <= rows[1].1.hits);
}
