use std::net::{SocketAddr, TcpListener};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;

use crate::fragment::FragmentRequest;
use crate::server::HttpHandle;

use super::{CacheStats, Capacity, Store};

#[derive(Debug, thiserror::Error)]
pub enum ProxyError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("proxy I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot build upstream client: {0}")]
    Client(String),
}

struct State {
    store: Store<String, Bytes>,
    stats: CacheStats,
}

struct Shared {
    upstream: String,
    client: reqwest::Client,
    state: Mutex<State>,
}

/// An HTTP cache in front of a fragment server. Successful responses are
/// stored by canonical request URI and replayed verbatim; everything else
/// is passed through uncached.
pub struct CachingProxy {
    http: HttpHandle,
    shared: Arc<Shared>,
}

impl CachingProxy {
    /// Starts a proxy on `addr` (port 0 for an ephemeral port) forwarding to `upstream`.
    pub fn start(upstream: &str, capacity: Capacity, addr: SocketAddr) -> Result<Self, ProxyError> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ProxyError::Client(e.to_string()))?;
        let shared = Arc::new(Shared {
            upstream: upstream.trim_end_matches('/').to_owned(),
            client,
            state: Mutex::new(State { store: Store::new(capacity), stats: CacheStats::default() }),
        });
        let listener = TcpListener::bind(addr).map_err(|source| ProxyError::Bind { addr, source })?;
        let http = HttpHandle::spawn(listener, router(shared.clone()))?;
        Ok(Self { http, shared })
    }

    pub fn url(&self) -> String {
        self.http.url()
    }

    pub fn stats(&self) -> CacheStats {
        self.shared.state.lock().unwrap().stats
    }

    pub fn shutdown(self) -> std::io::Result<()> {
        self.http.shutdown()
    }
}

fn router(shared: Arc<Shared>) -> Router {
    Router::new().fallback(move |method: Method, uri: Uri| {
        let shared = shared.clone();
        async move {
            if method != Method::GET {
                return (StatusCode::METHOD_NOT_ALLOWED, "get-only\n").into_response();
            }
            let target = uri.path_and_query().map_or_else(|| uri.path().to_owned(), |pq| pq.as_str().to_owned());
            forward(&shared, target).await
        }
    })
}

fn body_response(status: StatusCode, body: Bytes) -> Response {
    (status, [(header::CONTENT_TYPE, "text/plain; charset=utf-8")], body).into_response()
}

async fn forward(shared: &Shared, target: String) -> Response {
    // Requests that do not parse are forwarded as-is and never cached.
    let key = FragmentRequest::parse_uri(&target).ok().map(|r| r.to_uri());
    if let Some(key) = &key {
        let mut state = shared.state.lock().unwrap();
        if let Some(body) = state.store.get(key).cloned() {
            state.stats.hits += 1;
            return body_response(StatusCode::OK, body);
        }
        state.stats.misses += 1;
    }
    let url = format!("{}{}", shared.upstream, key.as_deref().unwrap_or(&target));
    let upstream = match shared.client.get(url).send().await {
        Ok(r) => r,
        Err(e) => return (StatusCode::BAD_GATEWAY, format!("upstream-error: {e}\n")).into_response(),
    };
    let status = StatusCode::from_u16(upstream.status().as_u16()).unwrap_or(StatusCode::BAD_GATEWAY);
    let body = match upstream.bytes().await {
        Ok(b) => b,
        Err(e) => return (StatusCode::BAD_GATEWAY, format!("upstream-error: {e}\n")).into_response(),
    };
    if let (Some(key), StatusCode::OK) = (key, status) {
        shared.state.lock().unwrap().store.put(key, body.clone());
    }
    body_response(status, body)
}
