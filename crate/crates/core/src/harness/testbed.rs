use std::collections::BTreeMap;
use std::sync::Arc;

use crate::client::{Endpoint, HttpEndpoint, LocalEndpoint};
use crate::server::{serve_dataset, FragmentService, HttpHandle, ServerConfig};
use crate::store::Dataset;

use super::config::EndpointKind;
use super::HarnessError;

/// One server (or in-process service) per page size over a shared dataset.
pub struct Testbed {
    dataset: Arc<Dataset>,
    kind: EndpointKind,
    max_mpr: usize,
    servers: BTreeMap<usize, HttpHandle>,
}

impl Testbed {
    /// `max_mpr` is the server-side limit; it must cover every client setting.
    pub fn new(dataset: Arc<Dataset>, kind: EndpointKind, max_mpr: usize) -> Self {
        Self { dataset, kind, max_mpr, servers: BTreeMap::new() }
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    fn server_config(&self, page_size: usize) -> ServerConfig {
        ServerConfig { page_size, max_mpr: self.max_mpr, port: 0, ..ServerConfig::default() }
    }

    /// Base URL of the HTTP server for `page_size`, starting it on first use.
    pub fn url(&mut self, page_size: usize) -> Result<String, HarnessError> {
        if !self.servers.contains_key(&page_size) {
            let handle = serve_dataset(self.dataset.clone(), &self.server_config(page_size))?;
            self.servers.insert(page_size, handle);
        }
        Ok(self.servers[&page_size].url())
    }

    pub fn endpoint(&mut self, page_size: usize) -> Result<Arc<dyn Endpoint>, HarnessError> {
        Ok(match self.kind {
            EndpointKind::Local => {
                Arc::new(LocalEndpoint::new(FragmentService::new(self.dataset.clone(), &self.server_config(page_size))))
            }
            EndpointKind::Http => Arc::new(HttpEndpoint::new(&self.url(page_size)?)?),
        })
    }
}
