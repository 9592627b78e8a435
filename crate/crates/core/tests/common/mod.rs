//! Random case generators and brute-force reference implementations shared
//! by the integration tests. Nothing here goes through the library's
//! selector or join code.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use brtpf::client::BgpQuery;
use brtpf::rdf::{MappingSequence, SolutionMapping, Term, Triple, TriplePattern};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Term pools for a random dataset with `entities` subjects/objects.
pub struct Vocab {
    pub entities: Vec<Term>,
    pub predicates: Vec<Term>,
    pub literals: Vec<Term>,
}

impl Vocab {
    pub fn new(entities: usize, predicates: usize, literals: usize) -> Self {
        Self {
            entities: (0..entities).map(|i| Term::iri(&format!("urn:e{i}")).unwrap()).collect(),
            predicates: (0..predicates).map(|i| Term::iri(&format!("urn:p{i}")).unwrap()).collect(),
            literals: (0..literals).map(|i| Term::literal(&format!("l {i}"))).collect(),
        }
    }

    pub fn object(&self, rng: &mut ChaCha8Rng) -> Term {
        if rng.gen_bool(0.25) {
            self.literals.choose(rng).unwrap().clone()
        } else {
            self.entities.choose(rng).unwrap().clone()
        }
    }

    /// A constant valid at `position` (0 subject, 1 predicate, 2 object).
    pub fn constant(&self, rng: &mut ChaCha8Rng, position: usize) -> Term {
        match position {
            0 => self.entities.choose(rng).unwrap().clone(),
            1 => self.predicates.choose(rng).unwrap().clone(),
            _ => self.object(rng),
        }
    }
}

/// Up to `max` distinct random triples.
pub fn random_triples(rng: &mut ChaCha8Rng, vocab: &Vocab, max: usize) -> Vec<Triple> {
    let n = rng.gen_range(0..=max);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..n {
        let t = Triple::new(
            vocab.entities.choose(rng).unwrap().clone(),
            vocab.predicates.choose(rng).unwrap().clone(),
            vocab.object(rng),
        )
        .unwrap();
        if seen.insert(t.clone()) {
            out.push(t);
        }
    }
    out
}

const VARS: [&str; 5] = ["a", "b", "c", "d", "e"];

fn var(name: &str) -> Term {
    Term::variable(name).unwrap()
}

/// A random pattern over `vars`, each position a variable with probability `p_var`.
pub fn random_pattern(rng: &mut ChaCha8Rng, vocab: &Vocab, vars: &[&str], p_var: [f64; 3]) -> TriplePattern {
    let pick = |rng: &mut ChaCha8Rng, pos: usize| {
        if rng.gen_bool(p_var[pos]) {
            var(vars.choose(rng).unwrap())
        } else {
            vocab.constant(rng, pos)
        }
    };
    let s = pick(rng, 0);
    let p = pick(rng, 1);
    let o = pick(rng, 2);
    TriplePattern::new(s, p, o).unwrap()
}

/// Variables of `tp` that occur only in object position.
fn object_only(tp: &TriplePattern) -> HashSet<String> {
    let [s, p, o] = tp.terms();
    let mut out = HashSet::new();
    if o.is_variable() && o != s && o != p {
        out.insert(o.as_str().to_owned());
    }
    out
}

/// A random duplicate-free Ω of up to `max` mappings. Mappings may bind
/// variables outside `tp`; literals are only bound to object-only variables.
pub fn random_omega(rng: &mut ChaCha8Rng, vocab: &Vocab, tp: &TriplePattern, max: usize) -> MappingSequence {
    let objects = object_only(tp);
    let n = rng.gen_range(1..=max);
    let mut mappings = Vec::new();
    for _ in 0..n {
        let mut pairs = Vec::new();
        for name in VARS {
            if rng.gen_bool(0.5) {
                let value = if objects.contains(&format!("?{name}")) && rng.gen_bool(0.3) {
                    vocab.literals.choose(rng).unwrap().clone()
                } else {
                    vocab.entities.choose(rng).unwrap().clone()
                };
                pairs.push((name, value));
            }
        }
        mappings.push(SolutionMapping::from_pairs(pairs).unwrap());
    }
    MappingSequence::dedup_from(mappings)
}

/// A brute-force unifier over canonical term strings.
pub fn unify(row: &BTreeMap<String, String>, pattern: &TriplePattern, triple: &Triple) -> Option<BTreeMap<String, String>> {
    let mut out = row.clone();
    for (p, t) in pattern.terms().into_iter().zip(triple.terms()) {
        if p.as_str().starts_with('?') {
            match out.get(p.as_str()) {
                Some(v) if v != t.as_str() => return None,
                Some(_) => {}
                None => {
                    out.insert(p.as_str().to_owned(), t.as_str().to_owned());
                }
            }
        } else if p.as_str() != t.as_str() {
            return None;
        }
    }
    Some(out)
}

fn row_of(mu: &SolutionMapping) -> BTreeMap<String, String> {
    mu.iter().map(|(v, t)| (v.to_string(), t.as_str().to_owned())).collect()
}

/// The set of triples that match `tp` under some mapping of `omega`
/// (every triple of the graph is tested against every mapping).
pub fn brute_force_brtpf(triples: &[Triple], tp: &TriplePattern, omega: &MappingSequence) -> HashSet<Triple> {
    let rows: Vec<_> = omega.iter().map(row_of).collect();
    triples.iter().filter(|t| rows.iter().any(|row| unify(row, tp, t).is_some())).cloned().collect()
}

pub fn brute_force_tpf(triples: &[Triple], tp: &TriplePattern) -> HashSet<Triple> {
    triples.iter().filter(|t| unify(&BTreeMap::new(), tp, t).is_some()).cloned().collect()
}

/// Random BGP of 1-5 patterns. Most are random walks over `triples` with
/// terms consistently replaced by variables, so they have solutions; the
/// rest combine arbitrary patterns over the vocabulary.
pub fn random_bgp(rng: &mut ChaCha8Rng, vocab: &Vocab, triples: &[Triple], name: String) -> BgpQuery {
    let n = rng.gen_range(1..=5);
    let patterns = if triples.is_empty() || rng.gen_bool(0.2) {
        (0..n).map(|_| random_pattern(rng, vocab, &VARS[..3], [0.8, 0.15, 0.7])).collect()
    } else {
        let walk = random_walk(rng, triples, n);
        variableize(rng, &walk)
    };
    BgpQuery::new(name, patterns).unwrap()
}

/// `n` triples, each sharing a subject or object with an earlier one when possible.
fn random_walk(rng: &mut ChaCha8Rng, triples: &[Triple], n: usize) -> Vec<Triple> {
    let mut walk = vec![triples.choose(rng).unwrap().clone()];
    while walk.len() < n {
        let anchor = walk.choose(rng).unwrap();
        let node = if rng.gen_bool(0.5) || anchor.object.is_literal() { &anchor.subject } else { &anchor.object };
        let next: Vec<&Triple> = triples.iter().filter(|t| &t.subject == node || &t.object == node).collect();
        let t = next.choose(rng).copied().unwrap_or_else(|| triples.choose(rng).unwrap());
        walk.push(t.clone());
    }
    walk
}

/// Replaces terms by variables, the same term always by the same variable.
fn variableize(rng: &mut ChaCha8Rng, walk: &[Triple]) -> Vec<TriplePattern> {
    let mut names: BTreeMap<Term, Option<Term>> = BTreeMap::new();
    let mut next = 0;
    let mut convert = |rng: &mut ChaCha8Rng, term: &Term, p_var: f64| -> Term {
        let slot = names.entry(term.clone()).or_insert_with(|| {
            if next < VARS.len() && rng.gen_bool(p_var) {
                next += 1;
                Some(var(VARS[next - 1]))
            } else {
                None
            }
        });
        slot.clone().unwrap_or_else(|| term.clone())
    };
    walk.iter()
        .map(|t| {
            let s = convert(rng, &t.subject, 0.75);
            let p = convert(rng, &t.predicate, 0.1);
            let o = convert(rng, &t.object, if t.object.is_literal() { 0.4 } else { 0.75 });
            TriplePattern::new(s, p, o).unwrap()
        })
        .collect()
}
