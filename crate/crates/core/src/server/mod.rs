//! The combined TPF/brTPF fragment server.
//!
//! Requests without a `bindings` parameter are answered by the plain triple
//! pattern selector, requests with one by the bindings-restricted selector.
//! Request handling is a pure function of the request target, so identical
//! targets always produce byte-identical bodies.

mod http;

use std::net::{IpAddr, Ipv4Addr, SocketAddr, TcpListener};
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response as AxumResponse};
use axum::Router;

use crate::fragment::{build_page, FragmentRequest, DEFAULT_METADATA_BASE, FRAGMENT_PATH};
use crate::kv::{KeyValues, KvError};
use crate::store::{Dataset, LoadError};

pub use http::HttpHandle;

pub const HEALTH_PATH: &str = "/health";
pub const MAX_MPR_EXCEEDED: &str = "maxMpR-exceeded";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServerConfig {
    pub page_size: usize,
    pub max_mpr: usize,
    pub uri_limit: usize,
    pub metadata_base: usize,
    pub bind: IpAddr,
    pub port: u16,
    pub data: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            page_size: 100,
            max_mpr: 30,
            uri_limit: 8000,
            metadata_base: DEFAULT_METADATA_BASE,
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            data: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Config(#[from] KvError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl ServerConfig {
    pub const KEYS: &'static [&'static str] = &["pageSize", "maxMpR", "uriLimit", "port", "data", "metaBase", "bind"];

    /// Overrides defaults with values from a `key=value` file.
    pub fn apply_kv(&mut self, kv: &KeyValues) -> Result<(), ServerError> {
        kv.check_known(Self::KEYS)?;
        if let Some(v) = kv.get("pageSize")? {
            self.page_size = v;
        }
        if let Some(v) = kv.get("maxMpR")? {
            self.max_mpr = v;
        }
        if let Some(v) = kv.get("uriLimit")? {
            self.uri_limit = v;
        }
        if let Some(v) = kv.get("port")? {
            self.port = v;
        }
        if let Some(v) = kv.get("metaBase")? {
            self.metadata_base = v;
        }
        if let Some(v) = kv.get("bind")? {
            self.bind = v;
        }
        if let Some(v) = kv.get_str("data") {
            self.data = Some(PathBuf::from(v));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ServerError> {
        if self.page_size == 0 {
            return Err(ServerError::Invalid("pageSize must be at least 1".into()));
        }
        if self.max_mpr == 0 {
            return Err(ServerError::Invalid("maxMpR must be at least 1".into()));
        }
        Ok(())
    }
}

/// A status code and a plain-text body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

impl Response {
    fn new(status: u16, body: impl Into<String>) -> Self {
        Self { status, body: body.into() }
    }
}

/// Request handling over a shared, immutable dataset.
#[derive(Clone)]
pub struct FragmentService {
    dataset: Arc<Dataset>,
    page_size: usize,
    max_mpr: usize,
    uri_limit: usize,
    metadata_base: usize,
}

impl FragmentService {
    pub fn new(dataset: Arc<Dataset>, config: &ServerConfig) -> Self {
        Self {
            dataset,
            page_size: config.page_size,
            max_mpr: config.max_mpr,
            uri_limit: config.uri_limit,
            metadata_base: config.metadata_base,
        }
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    pub fn max_mpr(&self) -> usize {
        self.max_mpr
    }

    /// Answers a GET for `target` (path plus query string).
    pub fn handle(&self, target: &str) -> Response {
        if target.len() > self.uri_limit {
            return Response::new(414, "uri-too-long\n");
        }
        let path = target.split_once('?').map_or(target, |(p, _)| p);
        if path == HEALTH_PATH {
            return Response::new(200, format!("triples={}\n", self.dataset.len()));
        }
        if path != FRAGMENT_PATH {
            return Response::new(404, "not-found\n");
        }
        let request = match FragmentRequest::parse_uri(target) {
            Ok(r) => r,
            Err(e) => return Response::new(400, format!("malformed-request: {e}\n")),
        };
        if request.bindings.len() > self.max_mpr {
            return Response::new(400, format!("{MAX_MPR_EXCEEDED}\n"));
        }
        match build_page(&self.dataset, &request, self.page_size, self.metadata_base) {
            Ok(page) => Response::new(200, page.to_body()),
            Err(e) => Response::new(400, format!("malformed-request: {e}\n")),
        }
    }

    pub fn router(self) -> Router {
        Router::new().fallback(move |method: Method, uri: Uri| {
            let service = self.clone();
            async move {
                if method != Method::GET {
                    return (StatusCode::METHOD_NOT_ALLOWED, "get-only\n").into_response();
                }
                let target = uri.path_and_query().map_or_else(|| uri.path().to_owned(), |pq| pq.as_str().to_owned());
                text_response(service.handle(&target))
            }
        })
    }
}

pub(crate) fn text_response(r: Response) -> AxumResponse {
    let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "text/plain; charset=utf-8")], r.body).into_response()
}

/// Loads the configured dataset and starts serving it.
pub fn serve(config: &ServerConfig) -> Result<HttpHandle, ServerError> {
    config.validate()?;
    let path = config.data.as_ref().ok_or_else(|| ServerError::Invalid("no dataset configured".into()))?;
    let dataset = Arc::new(Dataset::load_file(path)?);
    serve_dataset(dataset, config)
}

/// Serves an already loaded dataset. Port 0 picks a free port.
pub fn serve_dataset(dataset: Arc<Dataset>, config: &ServerConfig) -> Result<HttpHandle, ServerError> {
    config.validate()?;
    let addr = SocketAddr::new(config.bind, config.port);
    let listener = TcpListener::bind(addr).map_err(|source| ServerError::Bind { addr, source })?;
    Ok(HttpHandle::spawn(listener, FragmentService::new(dataset, config).router())?)
}
