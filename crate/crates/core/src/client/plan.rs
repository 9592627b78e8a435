use std::collections::HashSet;

use crate::fragment::{FragmentRequest, PageBody};
use crate::rdf::{TriplePattern, Var};
use crate::store::CardinalityEstimate;

use super::{BgpQuery, ClientError, Endpoint, ExecOptions, RunMetrics, Session};

/// A left-deep join order over the patterns of a query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    pub order: Vec<usize>,
    pub estimates: Vec<CardinalityEstimate>,
    /// Lowest-index pattern whose fragment is empty; the query has no solutions.
    pub empty_pattern: Option<usize>,
    pub cartesian_steps: u32,
}

/// Orders patterns: smallest estimate first, then repeatedly the smallest
/// remaining pattern that shares a variable with those already placed,
/// falling back to the smallest remaining one (a cartesian step) when none
/// does. Ties go to the lowest index.
pub fn order_patterns(patterns: &[TriplePattern], estimates: &[u64]) -> (Vec<usize>, u32) {
    assert_eq!(patterns.len(), estimates.len());
    let vars: Vec<Vec<Var>> = patterns.iter().map(TriplePattern::vars).collect();
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut order = Vec::with_capacity(patterns.len());
    let mut bound: HashSet<Var> = HashSet::new();
    let mut cartesian = 0;
    let smallest = |candidates: &mut dyn Iterator<Item = usize>| candidates.min_by_key(|&i| (estimates[i], i));
    while !remaining.is_empty() {
        let connected = smallest(&mut remaining.iter().copied().filter(|&i| vars[i].iter().any(|v| bound.contains(v))));
        let pick = match connected {
            Some(i) => i,
            None => {
                if !order.is_empty() {
                    cartesian += 1;
                }
                smallest(&mut remaining.iter().copied()).expect("non-empty")
            }
        };
        remaining.retain(|&i| i != pick);
        bound.extend(vars[pick].iter().cloned());
        order.push(pick);
    }
    (order, cartesian)
}

/// Fetches page 1 of every pattern's fragment and orders the patterns.
pub(super) fn plan_in(session: &mut Session<'_>, query: &BgpQuery) -> Result<(QueryPlan, Vec<PageBody>), ClientError> {
    let mut pages = Vec::with_capacity(query.patterns.len());
    for tp in &query.patterns {
        pages.push(session.fetch(&FragmentRequest::tpf(tp.clone()))?);
    }
    let counts: Vec<u64> = pages.iter().map(|p| p.count).collect();
    let (order, cartesian_steps) = order_patterns(&query.patterns, &counts);
    let plan = QueryPlan {
        order,
        estimates: counts.iter().map(|&count| CardinalityEstimate { count, epsilon: 0 }).collect(),
        empty_pattern: counts.iter().position(|&c| c == 0),
        cartesian_steps,
    };
    Ok((plan, pages))
}

/// Plans `query` against `endpoint`, returning the plan and the planning cost.
pub fn plan(query: &BgpQuery, endpoint: &dyn Endpoint) -> Result<(QueryPlan, RunMetrics), ClientError> {
    let mut session = Session::new(endpoint, &ExecOptions::default());
    let (plan, _) = plan_in(&mut session, query)?;
    Ok((plan, session.metrics))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patterns(lines: &[&str]) -> Vec<TriplePattern> {
        lines.iter().map(|l| TriplePattern::parse_line(l).unwrap()).collect()
    }

    #[test]
    fn single_pattern() {
        assert_eq!(order_patterns(&patterns(&["?x <urn:p> ?y"]), &[4]), (vec![0], 0));
    }

    #[test]
    fn smaller_first() {
        let ps = patterns(&["?x <urn:p> ?y", "?x <urn:q> ?z"]);
        assert_eq!(order_patterns(&ps, &[5, 3]).0, vec![1, 0]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let ps = patterns(&["?x <urn:p> ?y", "?x <urn:q> ?z", "?x <urn:r> ?w"]);
        assert_eq!(order_patterns(&ps, &[3, 3, 3]).0, vec![0, 1, 2]);
    }

    #[test]
    fn cartesian_steps_are_counted() {
        let ps = patterns(&["?x <urn:p> ?y", "?a <urn:q> ?b"]);
        assert_eq!(order_patterns(&ps, &[2, 1]), (vec![1, 0], 1));
    }

    /// Every order satisfying the ordering rules, by enumerating permutations.
    fn rule_conformant_orders(ps: &[TriplePattern], est: &[u64]) -> Vec<Vec<usize>> {
        fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
            if items.len() <= 1 {
                return vec![items];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.clone();
                let head = rest.remove(i);
                for mut tail in permutations(rest) {
                    tail.insert(0, head);
                    out.push(tail);
                }
            }
            out
        }
        let key = |i: usize| (est[i], i);
        permutations((0..ps.len()).collect())
            .into_iter()
            .filter(|order| {
                (0..order.len()).all(|k| {
                    let placed: HashSet<Var> = order[..k].iter().flat_map(|&i| ps[i].vars()).collect();
                    let rest = &order[k..];
                    let connected: Vec<usize> =
                        rest.iter().copied().filter(|&i| ps[i].vars().iter().any(|v| placed.contains(v))).collect();
                    let pool = if connected.is_empty() { rest.to_vec() } else { connected };
                    pool.iter().copied().min_by_key(|&i| key(i)) == Some(order[k])
                })
            })
            .collect()
    }

    #[test]
    fn connected_before_smaller() {
        // Pattern 1 is smallest; pattern 2 is smaller than 0 but shares no
        // variable with 1, while 0 does.
        let ps = patterns(&["?x <urn:a> ?y", "?x <urn:b> <urn:c>", "?y <urn:d> ?z"]);
        let est = [10, 2, 7];
        let (order, cartesian) = order_patterns(&ps, &est);
        assert_eq!(order, vec![1, 0, 2]);
        assert_eq!(cartesian, 0);
        assert_eq!(rule_conformant_orders(&ps, &est), vec![vec![1, 0, 2]]);
    }
}
