use crate::fragment::{FragmentRequest, PageBody};
use crate::rdf::{SolutionMapping, TriplePattern};

use super::{BgpQuery, ClientError, Endpoint, ExecOptions, ExecResult, Session};

/// Recursive TPF evaluation.
///
/// At every level page 1 of each remaining pattern is requested to learn its
/// cardinality; the smallest fragment is read completely and each of its
/// triples instantiates the remaining patterns for the next level.
pub fn execute_tpf(query: &BgpQuery, endpoint: &dyn Endpoint, options: &ExecOptions) -> ExecResult {
    let mut session = Session::new(endpoint, options);
    let mut out = Vec::new();
    let result = descend(&mut session, query.patterns.clone(), SolutionMapping::new(), &mut out).map(|()| out);
    session.finish(result)
}

fn descend(
    session: &mut Session<'_>,
    patterns: Vec<TriplePattern>,
    partial: SolutionMapping,
    out: &mut Vec<SolutionMapping>,
) -> Result<(), ClientError> {
    if patterns.is_empty() {
        out.push(partial);
        return Ok(());
    }
    let mut first_pages: Vec<PageBody> = Vec::with_capacity(patterns.len());
    for tp in &patterns {
        first_pages.push(session.fetch(&FragmentRequest::tpf(tp.clone()))?);
    }
    if first_pages.iter().any(|p| p.count == 0) {
        return Ok(());
    }
    let pick = (0..patterns.len()).min_by_key(|&i| (first_pages[i].count, i)).expect("non-empty");
    let pick_vars = patterns[pick].vars();
    let connected = patterns
        .iter()
        .enumerate()
        .any(|(i, tp)| i != pick && tp.vars().iter().any(|v| pick_vars.contains(v)));
    if patterns.len() > 1 && !connected {
        session.metrics.cartesian_steps += 1;
    }
    let request = FragmentRequest::tpf(patterns[pick].clone());
    let page = first_pages.swap_remove(pick);
    let triples = if session.reuse {
        session.fetch_remaining(&request, page)?
    } else {
        session.fetch_all(&request)?
    };

    for triple in &triples {
        session.check_deadline()?;
        let Some(binding) = patterns[pick].induced_mapping(triple) else { continue };
        let remaining: Result<Vec<TriplePattern>, _> = patterns
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pick)
            .map(|(_, tp)| tp.apply(&binding))
            .collect();
        // An instantiation that is not a valid pattern cannot match anything.
        let Ok(remaining) = remaining else { continue };
        let partial = partial.merge(&binding).expect("instantiated patterns bind fresh variables");
        descend(session, remaining, partial, out)?;
    }
    Ok(())
}
