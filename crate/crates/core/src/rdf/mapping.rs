use std::collections::{BTreeMap, HashSet};
use std::fmt;

use super::{RdfError, Term, Var};

/// A partial function from variables to ground terms.
///
/// Bindings are kept sorted by variable name, which makes equality, hashing
/// and the `?x=<a>,?y=<b>` wire form independent of insertion order.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolutionMapping {
    bindings: BTreeMap<Var, Term>,
}

impl SolutionMapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, RdfError>
    where
        I: IntoIterator<Item = (&'a str, Term)>,
    {
        let mut mu = Self::new();
        for (name, term) in pairs {
            let var = Var::new(name)?;
            if mu.bindings.contains_key(&var) {
                return Err(RdfError::DuplicateBinding(var));
            }
            mu.bind(var, term)?;
        }
        Ok(mu)
    }

    /// Binds `var`, replacing any previous value. Variables are not valid values.
    pub fn bind(&mut self, var: Var, term: Term) -> Result<(), RdfError> {
        if term.is_variable() {
            return Err(RdfError::VariableAsValue(var, term));
        }
        self.bindings.insert(var, term);
        Ok(())
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn contains(&self, var: &Var) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.bindings.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    /// True iff both mappings agree on every shared variable.
    pub fn compatible(&self, other: &SolutionMapping) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small
            .bindings
            .iter()
            .all(|(v, t)| large.bindings.get(v).is_none_or(|u| u == t))
    }

    pub fn merge(&self, other: &SolutionMapping) -> Result<SolutionMapping, RdfError> {
        if !self.compatible(other) {
            return Err(RdfError::IncompatibleMappings);
        }
        let mut out = self.clone();
        for (v, t) in &other.bindings {
            out.bindings.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Ok(out)
    }

    /// Restriction to the given variables.
    pub fn project<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> SolutionMapping {
        let mut out = SolutionMapping::new();
        for v in vars {
            if let Some(t) = self.bindings.get(v) {
                out.bindings.insert(v.clone(), t.clone());
            }
        }
        out
    }

    /// `?x=<a>,?y="b"`, sorted by variable; the empty mapping is the empty string.
    pub fn to_wire(&self) -> String {
        let mut out = String::new();
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(v.as_term().as_str());
            out.push('=');
            out.push_str(t.as_str());
        }
        out
    }

    /// Parses one mapping from the start of `input`, stopping before a `;`
    /// separator or at the end of input.
    pub fn parse_wire_prefix(input: &str) -> Result<(Self, &str), RdfError> {
        let mut mu = SolutionMapping::new();
        let mut rest = input;
        if rest.is_empty() || rest.starts_with(';') {
            return Ok((mu, rest));
        }
        loop {
            let (var_term, tail) = Term::parse_prefix(rest)?;
            let var = var_term
                .as_var()
                .ok_or_else(|| RdfError::Syntax(format!("expected a variable, found {var_term}")))?;
            let tail = tail
                .strip_prefix('=')
                .ok_or_else(|| RdfError::Syntax(format!("expected '=' after {var}")))?;
            let (value, tail) = Term::parse_prefix(tail)?;
            if mu.contains(&var) {
                return Err(RdfError::DuplicateBinding(var));
            }
            mu.bind(var, value)?;
            if let Some(next) = tail.strip_prefix(',') {
                rest = next;
            } else if tail.is_empty() || tail.starts_with(';') {
                return Ok((mu, tail));
            } else {
                return Err(RdfError::Syntax(format!("unexpected input {tail:?} in mapping")));
            }
        }
    }
}

impl fmt::Debug for SolutionMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_wire())
    }
}

/// An ordered sequence of pairwise distinct solution mappings.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct MappingSequence {
    mappings: Vec<SolutionMapping>,
}

impl MappingSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vec(mappings: Vec<SolutionMapping>) -> Result<Self, RdfError> {
        let mut seen = HashSet::with_capacity(mappings.len());
        for mu in &mappings {
            if !seen.insert(mu) {
                return Err(RdfError::DuplicateMapping(mu.to_wire()));
            }
        }
        Ok(Self { mappings })
    }

    /// Builds a sequence from `mappings`, keeping only first occurrences.
    pub fn dedup_from<I: IntoIterator<Item = SolutionMapping>>(mappings: I) -> Self {
        let mut seen = HashSet::new();
        let mappings = mappings.into_iter().filter(|mu| seen.insert(mu.clone())).collect();
        Self { mappings }
    }

    pub fn len(&self) -> usize {
        self.mappings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mappings.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SolutionMapping> {
        self.mappings.iter()
    }

    pub fn as_slice(&self) -> &[SolutionMapping] {
        &self.mappings
    }

    /// `mu1;mu2;...` in sequence order.
    pub fn to_wire(&self) -> String {
        self.mappings.iter().map(SolutionMapping::to_wire).collect::<Vec<_>>().join(";")
    }

    /// Inverse of [`MappingSequence::to_wire`]. The empty string denotes the
    /// one-element sequence holding the empty mapping, so callers must
    /// represent the empty sequence by omitting the wire form entirely.
    pub fn parse_wire(input: &str) -> Result<Self, RdfError> {
        let mut mappings = Vec::new();
        let mut rest = input;
        loop {
            let (mu, tail) = SolutionMapping::parse_wire_prefix(rest)?;
            mappings.push(mu);
            match tail.strip_prefix(';') {
                Some(next) => rest = next,
                None => break,
            }
        }
        Self::from_vec(mappings)
    }
}

impl<'a> IntoIterator for &'a MappingSequence {
    type Item = &'a SolutionMapping;
    type IntoIter = std::slice::Iter<'a, SolutionMapping>;

    fn into_iter(self) -> Self::IntoIter {
        self.mappings.iter()
    }
}

impl fmt::Debug for MappingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.mappings).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu(pairs: &[(&str, &str)]) -> SolutionMapping {
        SolutionMapping::from_pairs(pairs.iter().map(|(v, t)| (*v, Term::parse(t).unwrap()))).unwrap()
    }

    #[test]
    fn compatible_examples() {
        assert!(mu(&[("x", "<urn:a>")]).compatible(&mu(&[("y", "<urn:b>")])));
        assert!(mu(&[("x", "<urn:a>")]).compatible(&mu(&[("x", "<urn:a>"), ("y", "<urn:b>")])));
        assert!(!mu(&[("x", "<urn:a>")]).compatible(&mu(&[("x", "<urn:b>")])));
        assert!(SolutionMapping::new().compatible(&mu(&[("x", "<urn:b>")])));
    }

    #[test]
    fn merge_examples() {
        let a = mu(&[("x", "<urn:a>")]);
        assert_eq!(a.merge(&mu(&[("y", "<urn:b>")])).unwrap(), mu(&[("x", "<urn:a>"), ("y", "<urn:b>")]));
        assert_eq!(a.merge(&SolutionMapping::new()).unwrap(), a);
        assert_eq!(a.merge(&a).unwrap(), a);
        assert!(matches!(a.merge(&mu(&[("x", "<urn:b>")])), Err(RdfError::IncompatibleMappings)));
    }

    #[test]
    fn bindings_reject_variables_and_duplicates() {
        assert!(SolutionMapping::from_pairs([("x", Term::parse("?y").unwrap())]).is_err());
        assert!(SolutionMapping::from_pairs([
            ("x", Term::parse("<urn:a>").unwrap()),
            ("x", Term::parse("<urn:b>").unwrap()),
        ])
        .is_err());
    }

    #[test]
    fn wire_form() {
        let m = mu(&[("y", "\"a,b;c\""), ("x", "<urn:a>")]);
        assert_eq!(m.to_wire(), "?x=<urn:a>,?y=\"a,b;c\"");
        let seq = MappingSequence::from_vec(vec![m.clone(), SolutionMapping::new()]).unwrap();
        assert_eq!(seq.to_wire(), "?x=<urn:a>,?y=\"a,b;c\";");
        assert_eq!(MappingSequence::parse_wire(&seq.to_wire()).unwrap(), seq);
        let single_empty = MappingSequence::parse_wire("").unwrap();
        assert_eq!(single_empty.len(), 1);
        assert!(single_empty.as_slice()[0].is_empty());
    }

    #[test]
    fn wire_rejects_malformed() {
        assert!(MappingSequence::parse_wire("x=<urn:a>").is_err());
        assert!(MappingSequence::parse_wire("?x<urn:a>").is_err());
        assert!(MappingSequence::parse_wire("?x=<urn:a>;?x=<urn:a>").is_err());
        assert!(MappingSequence::parse_wire("?x=<urn:a>,?x=<urn:b>").is_err());
        assert!(MappingSequence::parse_wire("?x=?y").is_err());
        assert!(MappingSequence::parse_wire("?x=<urn:a>;;").is_err());
    }

    #[test]
    fn sequence_requires_distinct() {
        assert!(MappingSequence::from_vec(vec![mu(&[("x", "<urn:a>")]), mu(&[("x", "<urn:a>")])]).is_err());
        let seq = MappingSequence::dedup_from(vec![mu(&[("x", "<urn:a>")]), mu(&[("x", "<urn:a>")])]);
        assert_eq!(seq.len(), 1);
    }
}
