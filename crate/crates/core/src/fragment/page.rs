use std::fmt::Write as _;

use crate::rdf::{RdfError, Triple};
use crate::store::{CardinalityEstimate, Dataset};

use super::FragmentRequest;

/// URI template advertised as the hypermedia control of every page.
pub const TEMPLATE_CONTROL: &str = "/fragment{?s,p,o,page,bindings}";

/// Non-data triples serialized with each page apart from the next/prev links:
/// the `void:triples` count, the template control and the page self-description.
pub const DEFAULT_METADATA_BASE: usize = 3;

/// `base` plus one triple per navigation link present.
pub fn metadata_triple_count(base: usize, has_next: bool, has_prev: bool) -> usize {
    base + usize::from(has_next) + usize::from(has_prev)
}

/// Slices page `page` (1-based) out of `all`. Pages past the end are empty.
pub fn paginate<T>(all: &[T], page_size: usize, page: u64) -> (&[T], bool) {
    assert!(page_size >= 1 && page >= 1, "page size and page number must be positive");
    let start = usize::try_from(page - 1).ok().and_then(|p| p.checked_mul(page_size));
    match start {
        Some(start) if start < all.len() => {
            let end = start.saturating_add(page_size).min(all.len());
            (&all[start..end], end < all.len())
        }
        _ => (&[], false),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlSet {
    pub template: &'static str,
    pub next_page: Option<String>,
    pub prev_page: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentPage {
    pub request: FragmentRequest,
    pub data: Vec<Triple>,
    pub estimate: CardinalityEstimate,
    pub has_next: bool,
    pub controls: ControlSet,
    pub metadata_triple_count: usize,
}

/// Builds one page of the fragment selected by `req`.
pub fn build_page(
    ds: &Dataset,
    req: &FragmentRequest,
    page_size: usize,
    metadata_base: usize,
) -> Result<FragmentPage, RdfError> {
    let all = ds.select_brtpf(&req.pattern, &req.bindings)?;
    let (slice, has_next) = paginate(&all, page_size, req.page);
    let next_page = has_next.then(|| req.with_page(req.page + 1).to_uri());
    let prev_page = (req.page > 1).then(|| req.with_page(req.page - 1).to_uri());
    let metadata_triple_count = metadata_triple_count(metadata_base, next_page.is_some(), prev_page.is_some());
    Ok(FragmentPage {
        request: req.clone(),
        data: slice.to_vec(),
        estimate: CardinalityEstimate::exact(all.len()),
        has_next,
        controls: ControlSet { template: TEMPLATE_CONTROL, next_page, prev_page },
        metadata_triple_count,
    })
}

impl FragmentPage {
    /// The response body: metadata block, blank line, one data triple per line.
    pub fn to_body(&self) -> String {
        let mut out = String::with_capacity(64 + self.data.len() * 64);
        writeln!(out, "count={}", self.estimate.count).unwrap();
        writeln!(out, "hasNext={}", self.has_next).unwrap();
        if let Some(next) = &self.controls.next_page {
            writeln!(out, "next={next}").unwrap();
        }
        if let Some(prev) = &self.controls.prev_page {
            writeln!(out, "prev={prev}").unwrap();
        }
        writeln!(out, "meta={}", self.metadata_triple_count).unwrap();
        out.push('\n');
        for t in &self.data {
            writeln!(out, "{t}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed page body: {0}")]
pub struct BodyError(pub String);

/// A page as the client sees it after parsing the response body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageBody {
    pub count: u64,
    pub has_next: bool,
    pub next: Option<String>,
    pub prev: Option<String>,
    pub meta: usize,
    pub data: Vec<Triple>,
}

impl PageBody {
    pub fn parse(body: &str) -> Result<Self, BodyError> {
        let (head, data) = body
            .split_once("\n\n")
            .ok_or_else(|| BodyError("missing blank line after metadata".into()))?;
        let mut count = None;
        let mut has_next = None;
        let mut next = None;
        let mut prev = None;
        let mut meta = None;
        for line in head.lines() {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BodyError(format!("bad metadata line {line:?}")))?;
            let bad = || BodyError(format!("bad value in {line:?}"));
            match key {
                "count" => count = Some(value.parse().map_err(|_| bad())?),
                "hasNext" => has_next = Some(value.parse().map_err(|_| bad())?),
                "next" => next = Some(value.to_owned()),
                "prev" => prev = Some(value.to_owned()),
                "meta" => meta = Some(value.parse().map_err(|_| bad())?),
                _ => return Err(BodyError(format!("unknown metadata key {key:?}"))),
            }
        }
        let data = data
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| Triple::parse_line(l).map_err(|e| BodyError(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            count: count.ok_or_else(|| BodyError("missing count".into()))?,
            has_next: has_next.ok_or_else(|| BodyError("missing hasNext".into()))?,
            next,
            prev,
            meta: meta.ok_or_else(|| BodyError("missing meta".into()))?,
            data,
        })
    }
}
