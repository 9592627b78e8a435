use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::fragment::{FragmentRequest, PageBody};
use crate::server::FragmentService;

use super::ClientError;

/// Something that answers fragment page requests.
pub trait Endpoint: Send + Sync {
    fn fetch(&self, request: &FragmentRequest) -> Result<PageBody, ClientError>;
}

impl<E: Endpoint + ?Sized> Endpoint for &E {
    fn fetch(&self, request: &FragmentRequest) -> Result<PageBody, ClientError> {
        (**self).fetch(request)
    }
}

impl<E: Endpoint + ?Sized> Endpoint for Arc<E> {
    fn fetch(&self, request: &FragmentRequest) -> Result<PageBody, ClientError> {
        (**self).fetch(request)
    }
}

impl<E: Endpoint + ?Sized> Endpoint for Box<E> {
    fn fetch(&self, request: &FragmentRequest) -> Result<PageBody, ClientError> {
        (**self).fetch(request)
    }
}

fn decode(status: u16, body: &str) -> Result<PageBody, ClientError> {
    match status {
        200 => Ok(PageBody::parse(body)?),
        400 | 414 => Err(ClientError::Rejected { status, reason: body.trim().to_owned() }),
        other => Err(ClientError::Transport(format!("unexpected status {other}: {}", body.trim()))),
    }
}

/// A fragment server reached over HTTP GET.
#[derive(Clone)]
pub struct HttpEndpoint {
    base: String,
    client: reqwest::blocking::Client,
}

impl HttpEndpoint {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Result<Self, ClientError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .pool_max_idle_per_host(64)
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(Self { base: base.trim_end_matches('/').to_owned(), client })
    }

    pub fn base(&self) -> &str {
        &self.base
    }
}

impl Endpoint for HttpEndpoint {
    fn fetch(&self, request: &FragmentRequest) -> Result<PageBody, ClientError> {
        let url = format!("{}{}", self.base, request.to_uri());
        let response = self.client.get(url).send().map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        decode(status, &body)
    }
}

/// Calls the request handler in-process. Bodies are still serialized and
/// parsed, so metrics match the HTTP path exactly.
#[derive(Clone)]
pub struct LocalEndpoint {
    service: FragmentService,
}

impl LocalEndpoint {
    pub fn new(service: FragmentService) -> Self {
        Self { service }
    }
}

impl Endpoint for LocalEndpoint {
    fn fetch(&self, request: &FragmentRequest) -> Result<PageBody, ClientError> {
        let response = self.service.handle(&request.to_uri());
        decode(response.status, &response.body)
    }
}

/// Records the canonical URI of every request passed through it.
pub struct RecordingEndpoint<E> {
    inner: E,
    trace: Mutex<Vec<String>>,
}

impl<E: Endpoint> RecordingEndpoint<E> {
    pub fn new(inner: E) -> Self {
        Self { inner, trace: Mutex::new(Vec::new()) }
    }

    pub fn trace(&self) -> Vec<String> {
        self.trace.lock().unwrap().clone()
    }

    pub fn take_trace(&self) -> Vec<String> {
        std::mem::take(&mut *self.trace.lock().unwrap())
    }
}

impl<E: Endpoint> Endpoint for RecordingEndpoint<E> {
    fn fetch(&self, request: &FragmentRequest) -> Result<PageBody, ClientError> {
        self.trace.lock().unwrap().push(request.to_uri());
        self.inner.fetch(request)
    }
}
