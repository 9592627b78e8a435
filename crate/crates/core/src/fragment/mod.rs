//! The Linked Data Fragment model: request identity, paging and page bodies.

mod page;
mod request;

pub use page::{
    build_page, metadata_triple_count, paginate, BodyError, ControlSet, FragmentPage, PageBody,
    DEFAULT_METADATA_BASE, TEMPLATE_CONTROL,
};
pub use request::{FragmentRequest, RequestError, FRAGMENT_PATH};
