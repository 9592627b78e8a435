use std::fmt;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use crate::rdf::{MappingSequence, RdfError, Term, TriplePattern};

/// Everything except RFC 3986 unreserved characters gets percent-encoded.
const COMPONENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

pub const FRAGMENT_PATH: &str = "/fragment";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RequestError {
    #[error("unknown path {0:?}")]
    UnknownPath(String),
    #[error("missing parameter {0:?}")]
    MissingParam(&'static str),
    #[error("parameter {0:?} given twice")]
    DuplicateParam(String),
    #[error("unknown parameter {0:?}")]
    UnknownParam(String),
    #[error("invalid page number {0:?}")]
    BadPage(String),
    #[error("parameter {0:?} is not valid percent-encoded UTF-8")]
    BadEncoding(String),
    #[error("parameter {param}: {source}")]
    Term { param: &'static str, source: RdfError },
}

/// A fragment page request: the selector (pattern plus optional bindings)
/// and a 1-based page number. An empty binding sequence is a plain TPF request.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FragmentRequest {
    pub pattern: TriplePattern,
    pub bindings: MappingSequence,
    pub page: u64,
}

impl FragmentRequest {
    pub fn tpf(pattern: TriplePattern) -> Self {
        Self { pattern, bindings: MappingSequence::new(), page: 1 }
    }

    pub fn brtpf(pattern: TriplePattern, bindings: MappingSequence) -> Self {
        Self { pattern, bindings, page: 1 }
    }

    pub fn with_page(&self, page: u64) -> Self {
        Self { page, ..self.clone() }
    }

    pub fn has_bindings(&self) -> bool {
        !self.bindings.is_empty()
    }

    /// The canonical request URI (path and query), which doubles as cache key.
    pub fn to_uri(&self) -> String {
        let enc = |s: &str| utf8_percent_encode(s, COMPONENT).to_string();
        let mut uri = format!(
            "{FRAGMENT_PATH}?s={}&p={}&o={}&page={}",
            enc(self.pattern.subject.as_str()),
            enc(self.pattern.predicate.as_str()),
            enc(self.pattern.object.as_str()),
            self.page
        );
        if self.has_bindings() {
            uri.push_str("&bindings=");
            uri.push_str(&enc(&self.bindings.to_wire()));
        }
        uri
    }

    /// Parses a request target such as `/fragment?s=...`. Parameters may come
    /// in any order; a missing `page` means page 1.
    pub fn parse_uri(target: &str) -> Result<Self, RequestError> {
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        if path != FRAGMENT_PATH {
            return Err(RequestError::UnknownPath(path.to_owned()));
        }
        Self::parse_query(query)
    }

    pub fn parse_query(query: &str) -> Result<Self, RequestError> {
        let mut s = None;
        let mut p = None;
        let mut o = None;
        let mut page = None;
        let mut bindings = None;
        for pair in query.split('&').filter(|x| !x.is_empty()) {
            let (key, raw) = pair.split_once('=').unwrap_or((pair, ""));
            let slot = match key {
                "s" => &mut s,
                "p" => &mut p,
                "o" => &mut o,
                "page" => &mut page,
                "bindings" => &mut bindings,
                other => return Err(RequestError::UnknownParam(other.to_owned())),
            };
            if slot.is_some() {
                return Err(RequestError::DuplicateParam(key.to_owned()));
            }
            let decoded = percent_decode_str(raw)
                .decode_utf8()
                .map_err(|_| RequestError::BadEncoding(key.to_owned()))?;
            *slot = Some(decoded.into_owned());
        }
        let term = |value: Option<String>, param: &'static str| -> Result<Term, RequestError> {
            let value = value.ok_or(RequestError::MissingParam(param))?;
            Term::parse(&value).map_err(|source| RequestError::Term { param, source })
        };
        let subject = term(s, "s")?;
        let predicate = term(p, "p")?;
        let object = term(o, "o")?;
        let pattern = TriplePattern::new(subject, predicate, object)
            .map_err(|source| RequestError::Term { param: "p", source })?;
        let page = match page {
            None => 1,
            Some(raw) => match raw.parse::<u64>() {
                Ok(n) if n >= 1 => n,
                _ => return Err(RequestError::BadPage(raw)),
            },
        };
        let bindings = match bindings {
            None => MappingSequence::new(),
            Some(raw) => MappingSequence::parse_wire(&raw)
                .map_err(|source| RequestError::Term { param: "bindings", source })?,
        };
        Ok(Self { pattern, bindings, page })
    }
}

impl fmt::Debug for FragmentRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_uri())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::SolutionMapping;
    use proptest::prelude::*;

    fn tp(s: &str) -> TriplePattern {
        TriplePattern::parse_line(s).unwrap()
    }

    #[test]
    fn canonical_tpf_uri() {
        let req = FragmentRequest::tpf(tp("?x <http://ex.org/p> \"a b\""));
        assert_eq!(
            req.to_uri(),
            "/fragment?s=%3Fx&p=%3Chttp%3A%2F%2Fex.org%2Fp%3E&o=%22a%20b%22&page=1"
        );
        assert_eq!(FragmentRequest::parse_uri(&req.to_uri()).unwrap(), req);
    }

    #[test]
    fn bindings_param_present_only_for_brtpf() {
        let plain = FragmentRequest::tpf(tp("?x <urn:p> ?y"));
        assert!(!plain.to_uri().contains("bindings"));
        let single_empty = FragmentRequest::brtpf(
            tp("?x <urn:p> ?y"),
            MappingSequence::from_vec(vec![SolutionMapping::new()]).unwrap(),
        );
        assert!(single_empty.to_uri().ends_with("&bindings="));
        assert_eq!(FragmentRequest::parse_uri(&single_empty.to_uri()).unwrap(), single_empty);
        assert_ne!(plain.to_uri(), single_empty.to_uri());
    }

    #[test]
    fn page_defaults_to_one_and_order_is_free() {
        let req = FragmentRequest::parse_uri("/fragment?o=%3Fz&p=%3Fy&s=%3Fx").unwrap();
        assert_eq!(req.page, 1);
        assert_eq!(req.pattern, tp("?x ?y ?z"));
    }

    #[test]
    fn malformed_requests() {
        for bad in [
            "/other?s=%3Fx&p=%3Fy&o=%3Fz",
            "/fragment?s=%3Fx&p=%3Fy",
            "/fragment?s=%3Fx&s=%3Fx&p=%3Fy&o=%3Fz",
            "/fragment?s=%3Fx&p=%3Fy&o=%3Fz&page=0",
            "/fragment?s=%3Fx&p=%3Fy&o=%3Fz&page=abc",
            "/fragment?s=%3Fx&p=%3Fy&o=%3Fz&q=1",
            "/fragment?s=x&p=%3Fy&o=%3Fz",
            "/fragment?s=%3Fx&p=%22l%22&o=%3Fz",
            "/fragment?s=%3Fx&p=%3Fy&o=%3Fz&bindings=x%3D1",
            "/fragment?s=%FF&p=%3Fy&o=%3Fz",
        ] {
            assert!(FragmentRequest::parse_uri(bad).is_err(), "{bad}");
        }
    }

    fn term() -> impl Strategy<Value = Term> {
        prop_oneof![
            "[a-z]{1,4}".prop_map(|s| Term::iri(&format!("http://ex.org/{s},;=&?%")).unwrap()),
            "[ -~]{0,6}".prop_map(|s| Term::literal(&s)),
        ]
    }

    fn var_or(term: BoxedStrategy<Term>) -> impl Strategy<Value = Term> {
        prop_oneof![(0..3u8).prop_map(|i| Term::variable(&format!("v{i}")).unwrap()), term]
    }

    fn request() -> impl Strategy<Value = FragmentRequest> {
        let iri = "[a-z]{1,3}".prop_map(|s| Term::iri(&format!("urn:{s}")).unwrap()).boxed();
        let mapping = proptest::collection::btree_map(0..3u8, term(), 0..3).prop_map(|m| {
            let mut mu = SolutionMapping::new();
            for (k, t) in m {
                mu.bind(crate::rdf::Var::new(&format!("v{k}")).unwrap(), t).unwrap();
            }
            mu
        });
        (
            var_or(iri.clone()),
            var_or(iri),
            var_or(term().boxed()),
            proptest::collection::vec(mapping, 0..4),
            1..50u64,
        )
            .prop_map(|(s, p, o, ms, page)| FragmentRequest {
                pattern: TriplePattern::new(s, p, o).unwrap(),
                bindings: MappingSequence::dedup_from(ms),
                page,
            })
    }

    proptest! {
        #[test]
        fn uri_round_trip(req in request()) {
            let uri = req.to_uri();
            let back = FragmentRequest::parse_uri(&uri).unwrap();
            prop_assert_eq!(back.to_uri(), uri);
            prop_assert_eq!(back, req);
        }

        #[test]
        fn uri_is_injective(a in request(), b in request()) {
            prop_assert_eq!(a.to_uri() == b.to_uri(), a == b);
        }
    }
}
