//! Brute-force BGP evaluation used as the correctness reference.

use std::collections::BTreeMap;

use crate::client::BgpQuery;
use crate::rdf::{SolutionMapping, Term, Triple};
use crate::store::Dataset;

/// Largest `patterns x triples` product the oracle accepts.
pub const ORACLE_GUARD: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("oracle refused: {patterns} patterns x {triples} triples exceeds {ORACLE_GUARD}")]
pub struct OracleTooLarge {
    pub patterns: usize,
    pub triples: usize,
}

type Row = BTreeMap<String, Term>;

/// Extends `row` so that `pattern` becomes `triple`, or returns `None`.
/// Works on raw term strings, independent of the pattern/mapping algebra.
fn unify(row: &Row, pattern: [&Term; 3], triple: [&Term; 3]) -> Option<Row> {
    let mut out = row.clone();
    for (p, t) in pattern.into_iter().zip(triple) {
        let s = p.as_str();
        if let Some(name) = s.strip_prefix('?') {
            match out.get(name) {
                Some(bound) if bound != t => return None,
                Some(_) => {}
                None => {
                    out.insert(name.to_owned(), t.clone());
                }
            }
        } else if s != t.as_str() {
            return None;
        }
    }
    Some(out)
}

/// Nested-loop evaluation: every pattern in the given order against every
/// triple. Output is duplicate-free and sorted.
pub fn oracle_bgp(ds: &Dataset, query: &BgpQuery) -> Result<Vec<SolutionMapping>, OracleTooLarge> {
    if query.patterns.len().saturating_mul(ds.len()) > ORACLE_GUARD {
        return Err(OracleTooLarge { patterns: query.patterns.len(), triples: ds.len() });
    }
    let triples: Vec<Triple> = ds.triples().collect();
    let mut rows: Vec<Row> = vec![Row::new()];
    for pattern in &query.patterns {
        let mut next = Vec::new();
        for row in &rows {
            for t in &triples {
                if let Some(extended) = unify(row, pattern.terms(), t.terms()) {
                    next.push(extended);
                }
            }
        }
        rows = next;
    }
    let mut out: Vec<SolutionMapping> = rows
        .into_iter()
        .map(|row| {
            SolutionMapping::from_pairs(row.iter().map(|(k, v)| (k.as_str(), v.clone()))).expect("ground values")
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Sorted, duplicate-free copy of `solutions` for comparisons.
pub fn normalize(mut solutions: Vec<SolutionMapping>) -> Vec<SolutionMapping> {
    solutions.sort();
    solutions.dedup();
    solutions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::TriplePattern;

    fn q(lines: &[&str]) -> BgpQuery {
        BgpQuery::new("t", lines.iter().map(|l| TriplePattern::parse_line(l).unwrap()).collect()).unwrap()
    }

    #[test]
    fn single_pattern_gives_induced_mappings() {
        let ds = Dataset::load("<urn:a> <urn:p> <urn:b> .\n<urn:c> <urn:p> <urn:d> .\n<urn:c> <urn:q> <urn:d> .\n".as_bytes()).unwrap();
        let query = q(&["?x <urn:p> ?y"]);
        let got = oracle_bgp(&ds, &query).unwrap();
        let expected: Vec<_> = ds.select_tpf(&query.patterns[0]).iter().map(|t| query.patterns[0].induced_mapping(t).unwrap()).collect();
        assert_eq!(got, normalize(expected));
    }

    #[test]
    fn disconnected_patterns_form_a_product() {
        let ds = Dataset::load("<urn:a> <urn:p> <urn:b> .\n<urn:c> <urn:q> <urn:d> .\n".as_bytes()).unwrap();
        let got = oracle_bgp(&ds, &q(&["?x <urn:p> ?y", "?z <urn:q> ?w"])).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].len(), 4);
    }

    #[test]
    fn repeated_variables_and_joins() {
        let ds = Dataset::load("<urn:a> <urn:p> <urn:a> .\n<urn:a> <urn:p> <urn:b> .\n<urn:b> <urn:q> \"x\" .\n".as_bytes()).unwrap();
        assert_eq!(oracle_bgp(&ds, &q(&["?x <urn:p> ?x"])).unwrap().len(), 1);
        assert_eq!(oracle_bgp(&ds, &q(&["?x <urn:p> ?y", "?y <urn:q> ?z"])).unwrap().len(), 1);
    }

    #[test]
    fn guard() {
        let lines: String = (0..50_001).map(|i| format!("<urn:s{i}> <urn:p> <urn:o> .\n")).collect();
        let ds = Dataset::load(lines.as_bytes()).unwrap();
        assert!(oracle_bgp(&ds, &q(&["?x <urn:p> ?y", "?x <urn:p> ?y"])).is_err());
    }
}
