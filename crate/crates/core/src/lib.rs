//! Triple Pattern Fragments (TPF) and bindings-restricted TPF (brTPF).
//!
//! The crate bundles an in-memory triple store, a fragment server that
//! speaks both interfaces, the two client-side BGP engines, an HTTP cache
//! simulator with a caching proxy, and the experiment harness that compares
//! the two interfaces.

pub mod cache;
pub mod client;
pub mod fragment;
pub mod harness;
pub mod kv;
pub mod rdf;
pub mod server;
pub mod store;
