//! Immutable in-memory triple store with SPO, POS and OSP indexes.
//!
//! Terms are dictionary-encoded with ids assigned in canonical string order,
//! so sorting id triples in subject/predicate/object order yields the
//! canonical deterministic order every selector answers in.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::rdf::{MappingSequence, RdfError, Term, Triple, TriplePattern};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: RdfError },
    #[error("line {line}: blank nodes are not allowed in the dataset")]
    BlankNode { line: usize },
}

/// A cardinality estimate together with its error bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CardinalityEstimate {
    pub count: u64,
    pub epsilon: u64,
}

impl CardinalityEstimate {
    pub fn exact(count: usize) -> Self {
        Self { count: count as u64, epsilon: 0 }
    }
}

type Ids = [u32; 3];

#[derive(Clone, Copy)]
enum Index {
    Spo,
    Pos,
    Osp,
}

pub struct Dataset {
    terms: Vec<Term>,
    ids: HashMap<Term, u32>,
    spo: Vec<Ids>,
    pos: Vec<Ids>,
    osp: Vec<Ids>,
}

impl std::fmt::Debug for Dataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dataset").field("triples", &self.spo.len()).field("terms", &self.terms.len()).finish()
    }
}

impl Dataset {
    pub fn empty() -> Self {
        Self::build(Vec::new())
    }

    /// Builds a dataset from triples; duplicates collapse, blank nodes are rejected.
    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I) -> Result<Self, LoadError> {
        let mut all = Vec::new();
        for (i, t) in triples.into_iter().enumerate() {
            if t.has_blank_node() {
                return Err(LoadError::BlankNode { line: i + 1 });
            }
            all.push(t);
        }
        Ok(Self::build(all))
    }

    /// Reads the line-oriented `s p o .` format. `#` lines and blank lines are skipped.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, LoadError> {
        let mut triples = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let triple = Triple::parse_line(trimmed).map_err(|source| LoadError::Parse { line: i + 1, source })?;
            if triple.has_blank_node() {
                return Err(LoadError::BlankNode { line: i + 1 });
            }
            triples.push(triple);
        }
        Ok(Self::build(triples))
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        Self::load(BufReader::new(File::open(path)?))
    }

    fn build(triples: Vec<Triple>) -> Self {
        let mut distinct: HashSet<&Term> = HashSet::new();
        for t in &triples {
            distinct.extend(t.terms());
        }
        let mut terms: Vec<Term> = distinct.into_iter().cloned().collect();
        terms.sort();
        let ids: HashMap<Term, u32> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();

        let mut spo: Vec<Ids> = triples
            .iter()
            .map(|t| [ids[&t.subject], ids[&t.predicate], ids[&t.object]])
            .collect();
        spo.sort_unstable();
        spo.dedup();
        let mut pos: Vec<Ids> = spo.iter().map(|&[s, p, o]| [p, o, s]).collect();
        pos.sort_unstable();
        let mut osp: Vec<Ids> = spo.iter().map(|&[s, p, o]| [o, s, p]).collect();
        osp.sort_unstable();
        Self { terms, ids, spo, pos, osp }
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// All triples in canonical order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|ids| self.decode(ids))
    }

    fn decode(&self, &[s, p, o]: &Ids) -> Triple {
        Triple {
            subject: self.terms[s as usize].clone(),
            predicate: self.terms[p as usize].clone(),
            object: self.terms[o as usize].clone(),
        }
    }

    /// Matching id triples in subject/predicate/object order, before the
    /// repeated-variable filter. `None` means some constant is not in the dataset.
    fn candidates(&self, tp: &TriplePattern) -> Option<(Vec<Ids>, bool)> {
        let mut bound: [Option<u32>; 3] = [None; 3];
        for (slot, term) in bound.iter_mut().zip(tp.terms()) {
            if !term.is_variable() {
                *slot = Some(*self.ids.get(term)?);
            }
        }
        let (index, prefix): (Index, Vec<u32>) = match bound {
            [Some(s), Some(p), Some(o)] => (Index::Spo, vec![s, p, o]),
            [Some(s), Some(p), None] => (Index::Spo, vec![s, p]),
            [Some(s), None, None] => (Index::Spo, vec![s]),
            [None, Some(p), Some(o)] => (Index::Pos, vec![p, o]),
            [None, Some(p), None] => (Index::Pos, vec![p]),
            [Some(s), None, Some(o)] => (Index::Osp, vec![o, s]),
            [None, None, Some(o)] => (Index::Osp, vec![o]),
            [None, None, None] => (Index::Spo, vec![]),
        };
        let table = match index {
            Index::Spo => &self.spo,
            Index::Pos => &self.pos,
            Index::Osp => &self.osp,
        };
        let n = prefix.len();
        let lo = table.partition_point(|k| k[..n] < prefix[..]);
        let hi = lo + table[lo..].partition_point(|k| k[..n] == prefix[..]);
        let range = &table[lo..hi];
        // Fixed prefixes of length two already leave the rows in SPO order.
        let needs_sort = matches!((index, n), (Index::Pos, 1) | (Index::Osp, 1));
        let mut rows: Vec<Ids> = match index {
            Index::Spo => range.to_vec(),
            Index::Pos => range.iter().map(|&[p, o, s]| [s, p, o]).collect(),
            Index::Osp => range.iter().map(|&[o, s, p]| [s, p, o]).collect(),
        };
        if needs_sort {
            rows.sort_unstable();
        }
        Some((rows, has_repeated_variable(tp)))
    }

    fn matching_ids(&self, tp: &TriplePattern) -> Vec<Ids> {
        match self.candidates(tp) {
            None => Vec::new(),
            Some((rows, false)) => rows,
            Some((rows, true)) => {
                let terms = tp.terms();
                let same_var = |i: usize, j: usize| terms[i].is_variable() && terms[i] == terms[j];
                let pairs: Vec<(usize, usize)> =
                    [(0, 1), (0, 2), (1, 2)].into_iter().filter(|&(i, j)| same_var(i, j)).collect();
                rows.into_iter().filter(|ids| pairs.iter().all(|&(i, j)| ids[i] == ids[j])).collect()
            }
        }
    }

    /// Every triple matching `tp`, in canonical order.
    pub fn select_tpf(&self, tp: &TriplePattern) -> Vec<Triple> {
        self.matching_ids(tp).iter().map(|ids| self.decode(ids)).collect()
    }

    /// The bindings-restricted selection: each mapping of `omega` instantiates
    /// `tp`, duplicate instantiations are dropped, the surviving patterns are
    /// evaluated in sequence order and their results concatenated with
    /// duplicate triples removed (first occurrence wins).
    pub fn select_brtpf(&self, tp: &TriplePattern, omega: &MappingSequence) -> Result<Vec<Triple>, RdfError> {
        if omega.is_empty() {
            return Ok(self.select_tpf(tp));
        }
        let mut seen_patterns = HashSet::new();
        let mut seen_rows = HashSet::new();
        let mut out = Vec::new();
        for mu in omega {
            let instantiated = tp.apply(mu)?;
            if !seen_patterns.insert(instantiated.clone()) {
                continue;
            }
            for ids in self.matching_ids(&instantiated) {
                if seen_rows.insert(ids) {
                    out.push(self.decode(&ids));
                }
            }
        }
        Ok(out)
    }

    pub fn count(&self, tp: &TriplePattern) -> CardinalityEstimate {
        let n = match self.candidates(tp) {
            None => 0,
            Some((rows, false)) => rows.len(),
            Some(_) => self.matching_ids(tp).len(),
        };
        CardinalityEstimate::exact(n)
    }

    pub fn count_brtpf(&self, tp: &TriplePattern, omega: &MappingSequence) -> Result<CardinalityEstimate, RdfError> {
        if omega.is_empty() {
            return Ok(self.count(tp));
        }
        Ok(CardinalityEstimate::exact(self.select_brtpf(tp, omega)?.len()))
    }
}

fn has_repeated_variable(tp: &TriplePattern) -> bool {
    let [s, p, o] = tp.terms();
    (s.is_variable() && (s == p || s == o)) || (p.is_variable() && p == o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::SolutionMapping;

    fn ds(lines: &str) -> Dataset {
        Dataset::load(lines.as_bytes()).unwrap()
    }

    fn tp(s: &str) -> TriplePattern {
        TriplePattern::parse_line(s).unwrap()
    }

    fn mu(pairs: &[(&str, &str)]) -> SolutionMapping {
        SolutionMapping::from_pairs(pairs.iter().map(|(v, t)| (*v, Term::parse(t).unwrap()))).unwrap()
    }

    const ABC: &str = "<urn:a> <urn:p> \"1\" .\n<urn:b> <urn:p> \"2\" .\n<urn:c> <urn:p> \"3\" .\n";

    #[test]
    fn load_basics() {
        assert_eq!(ds("").len(), 0);
        assert_eq!(ds("<urn:a> <urn:p> <urn:b> .\n<urn:a> <urn:p> <urn:b> .\n").len(), 1);
        assert_eq!(ds("# comment\n\n<urn:a> <urn:p> <urn:b> .\n").len(), 1);
    }

    #[test]
    fn load_errors_carry_line_numbers() {
        let err = Dataset::load("<urn:a> <urn:p> <urn:b> .\nnonsense\n".as_bytes()).unwrap_err();
        assert!(matches!(err, LoadError::Parse { line: 2, .. }));
        let err = Dataset::load("_:b <urn:p> <urn:b> .\n".as_bytes()).unwrap_err();
        assert!(matches!(err, LoadError::BlankNode { line: 1 }));
    }

    #[test]
    fn select_tpf_examples() {
        let d = ds(ABC);
        assert_eq!(d.select_tpf(&tp("?s ?p ?o")).len(), 3);
        assert_eq!(d.select_tpf(&tp("<urn:b> <urn:p> \"2\"")).len(), 1);
        let d = ds("<urn:a> <urn:p> <urn:a> .\n<urn:a> <urn:p> <urn:b> .\n");
        assert_eq!(d.select_tpf(&tp("?x <urn:p> ?x")), vec![Triple::parse_line("<urn:a> <urn:p> <urn:a>").unwrap()]);
        assert!(d.select_tpf(&tp("?x <urn:zzz> ?y")).is_empty());
    }

    #[test]
    fn select_tpf_is_canonically_ordered() {
        let d = ds("<urn:z> <urn:p> <urn:a> .\n<urn:a> <urn:q> <urn:a> .\n<urn:m> <urn:p> <urn:a> .\n<urn:a> <urn:p> <urn:a> .\n");
        for pattern in ["?s ?p ?o", "?s <urn:p> ?o", "?s ?p <urn:a>", "?s <urn:p> <urn:a>"] {
            let out = d.select_tpf(&tp(pattern));
            let mut sorted = out.clone();
            sorted.sort();
            assert_eq!(out, sorted, "{pattern}");
        }
    }

    #[test]
    fn select_brtpf_examples() {
        let d = ds(ABC);
        let pattern = tp("?x <urn:p> ?y");
        assert_eq!(d.select_brtpf(&pattern, &MappingSequence::new()).unwrap(), d.select_tpf(&pattern));
        let just_empty = MappingSequence::from_vec(vec![SolutionMapping::new()]).unwrap();
        assert_eq!(d.select_brtpf(&pattern, &just_empty).unwrap(), d.select_tpf(&pattern));

        let omega = MappingSequence::from_vec(vec![mu(&[("x", "<urn:a>")]), mu(&[("x", "<urn:c>")])]).unwrap();
        let got = d.select_brtpf(&pattern, &omega).unwrap();
        assert_eq!(
            got,
            vec![
                Triple::parse_line("<urn:a> <urn:p> \"1\"").unwrap(),
                Triple::parse_line("<urn:c> <urn:p> \"3\"").unwrap(),
            ]
        );
        assert_eq!(d.count_brtpf(&pattern, &omega).unwrap().count, 2);
    }

    #[test]
    fn select_brtpf_follows_sequence_order_and_dedups() {
        let d = ds(ABC);
        let pattern = tp("?x <urn:p> ?y");
        let omega = MappingSequence::from_vec(vec![
            mu(&[("x", "<urn:c>")]),
            mu(&[("x", "<urn:a>")]),
            mu(&[("x", "<urn:c>"), ("z", "<urn:q>")]),
            mu(&[("y", "\"3\"")]),
        ])
        .unwrap();
        let got = d.select_brtpf(&pattern, &omega).unwrap();
        let subjects: Vec<_> = got.iter().map(|t| t.subject.to_string()).collect();
        assert_eq!(subjects, ["<urn:c>", "<urn:a>"]);
    }

    #[test]
    fn select_brtpf_rejects_ill_typed_bindings() {
        let d = ds(ABC);
        let omega = MappingSequence::from_vec(vec![mu(&[("x", "\"lit\"")])]).unwrap();
        assert!(d.select_brtpf(&tp("?x <urn:p> ?y"), &omega).is_err());
    }

    #[test]
    fn count_examples() {
        let d = ds(ABC);
        assert_eq!(d.count(&tp("?s ?p ?o")), CardinalityEstimate { count: 3, epsilon: 0 });
        assert_eq!(d.count(&tp("<urn:a> <urn:p> \"9\"")).count, 0);
        let omega = MappingSequence::from_vec(vec![mu(&[("x", "<urn:nope>"), ("y", "\"0\"")])]).unwrap();
        assert_eq!(d.count_brtpf(&tp("?x <urn:p> ?y"), &omega).unwrap().count, 0);
    }
}
