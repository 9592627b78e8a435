use std::collections::{HashMap, HashSet};

use crate::fragment::{FragmentRequest, PageBody};
use crate::rdf::{MappingSequence, SolutionMapping, Triple, TriplePattern, Var};

use super::plan::plan_in;
use super::{BgpQuery, ClientError, Endpoint, ExecOptions, ExecResult, Session};

/// Bind-join execution over a fixed left-deep pipeline.
///
/// The first iterator reads the whole fragment of the first pattern. Every
/// later iterator cuts its input into chunks of `max_mpr` mappings, projects
/// each chunk onto the variables it shares with its pattern, and sends the
/// distinct projections as the bindings of one request. Returned triples are
/// joined back to every input mapping of the chunk they agree with.
pub fn execute_brtpf(query: &BgpQuery, endpoint: &dyn Endpoint, max_mpr: usize, options: &ExecOptions) -> ExecResult {
    let mut session = Session::new(endpoint, options);
    let result = if max_mpr == 0 {
        Err(ClientError::Config("maxMpR must be at least 1".into()))
    } else {
        run(&mut session, query, max_mpr)
    };
    session.finish(result)
}

fn run(session: &mut Session<'_>, query: &BgpQuery, max_mpr: usize) -> Result<Vec<SolutionMapping>, ClientError> {
    let (plan, pages) = plan_in(session, query)?;
    let mut planning_pages: Vec<Option<PageBody>> = pages.into_iter().map(Some).collect();
    if plan.empty_pattern.is_some() {
        return Ok(Vec::new());
    }
    session.metrics.cartesian_steps = plan.cartesian_steps;

    let first = plan.order[0];
    let first_pattern = &query.patterns[first];
    let triples = fetch_tpf_fragment(session, first_pattern, &mut planning_pages[first])?;
    let mut current: Vec<SolutionMapping> = triples.iter().filter_map(|t| first_pattern.induced_mapping(t)).collect();
    let mut bound: HashSet<Var> = first_pattern.vars().into_iter().collect();

    for &index in &plan.order[1..] {
        if current.is_empty() {
            break;
        }
        let pattern = &query.patterns[index];
        let shared: Vec<Var> = pattern.vars().into_iter().filter(|v| bound.contains(v)).collect();
        current = if shared.is_empty() {
            let triples = fetch_tpf_fragment(session, pattern, &mut planning_pages[index])?;
            cartesian(session, &current, pattern, &triples)?
        } else {
            let mut next = Vec::new();
            for chunk in current.chunks(max_mpr) {
                bind_join_chunk(session, pattern, &shared, chunk, &mut next)?;
            }
            next
        };
        bound.extend(pattern.vars());
    }
    Ok(current)
}

/// All triples of a plain fragment, starting from the planning page when reuse is on.
fn fetch_tpf_fragment(
    session: &mut Session<'_>,
    pattern: &TriplePattern,
    planning_page: &mut Option<PageBody>,
) -> Result<Vec<Triple>, ClientError> {
    let request = FragmentRequest::tpf(pattern.clone());
    match planning_page.take().filter(|_| session.reuse) {
        Some(page) => session.fetch_remaining(&request, page),
        None => session.fetch_all(&request),
    }
}

fn bind_join_chunk(
    session: &mut Session<'_>,
    pattern: &TriplePattern,
    shared: &[Var],
    chunk: &[SolutionMapping],
    out: &mut Vec<SolutionMapping>,
) -> Result<(), ClientError> {
    // Projection -> indexes of the chunk mappings that produced it.
    let mut fan_out: HashMap<SolutionMapping, Vec<usize>> = HashMap::new();
    let mut omega = Vec::new();
    for (i, mu) in chunk.iter().enumerate() {
        let key = mu.project(shared);
        match fan_out.get_mut(&key) {
            Some(group) => group.push(i),
            None => {
                // A binding that puts a literal in subject or predicate
                // position cannot match any triple.
                if pattern.apply(&key).is_err() {
                    continue;
                }
                fan_out.insert(key.clone(), vec![i]);
                omega.push(key);
            }
        }
    }
    if omega.is_empty() {
        return Ok(());
    }
    let bindings = MappingSequence::from_vec(omega).expect("projections are distinct");
    let triples = session.fetch_all(&FragmentRequest::brtpf(pattern.clone(), bindings))?;
    for t in &triples {
        let Some(mu_t) = pattern.induced_mapping(t) else { continue };
        if let Some(group) = fan_out.get(&mu_t.project(shared)) {
            for &i in group {
                out.push(chunk[i].merge(&mu_t).expect("agree on shared variables"));
            }
        }
    }
    session.check_deadline()
}

fn cartesian(
    session: &Session<'_>,
    inputs: &[SolutionMapping],
    pattern: &TriplePattern,
    triples: &[Triple],
) -> Result<Vec<SolutionMapping>, ClientError> {
    let right: Vec<SolutionMapping> = triples.iter().filter_map(|t| pattern.induced_mapping(t)).collect();
    let mut out = Vec::with_capacity(inputs.len() * right.len());
    for mu in inputs {
        session.check_deadline()?;
        out.extend(right.iter().map(|r| mu.merge(r).expect("disjoint domains")));
    }
    Ok(out)
}
