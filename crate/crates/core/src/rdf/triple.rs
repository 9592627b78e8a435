use std::fmt;

use super::{RdfError, SolutionMapping, Term, TermKind, Var};

/// Position inside a triple or triple pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Subject,
    Predicate,
    Object,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Subject => "subject",
            Position::Predicate => "predicate",
            Position::Object => "object",
        })
    }
}

const POSITIONS: [Position; 3] = [Position::Subject, Position::Predicate, Position::Object];

fn check_position(term: &Term, position: Position) -> Result<(), RdfError> {
    let ill_typed = matches!(
        (position, term.kind()),
        (Position::Subject, TermKind::Literal) | (Position::Predicate, TermKind::Literal | TermKind::BlankNode)
    );
    if ill_typed {
        Err(RdfError::IllTypedPosition { term: term.clone(), position })
    } else {
        Ok(())
    }
}

/// A ground RDF statement.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, RdfError> {
        for (term, position) in [&subject, &predicate, &object].into_iter().zip(POSITIONS) {
            if term.is_variable() {
                return Err(RdfError::VariableInTriple(term.clone()));
            }
            check_position(term, position)?;
        }
        Ok(Self { subject, predicate, object })
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn has_blank_node(&self) -> bool {
        self.terms().iter().any(|t| t.kind() == TermKind::BlankNode)
    }

    /// Parses a `s p o .` line (the trailing dot is optional).
    pub fn parse_line(line: &str) -> Result<Self, RdfError> {
        let [s, p, o] = parse_three_terms(line)?;
        Self::new(s, p, o)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

/// A triple with variables allowed in any position.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    /// Literals are rejected in subject and predicate position, blank nodes in
    /// predicate position.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, RdfError> {
        for (term, position) in [&subject, &predicate, &object].into_iter().zip(POSITIONS) {
            check_position(term, position)?;
        }
        Ok(Self { subject, predicate, object })
    }

    pub fn parse_line(line: &str) -> Result<Self, RdfError> {
        let [s, p, o] = parse_three_terms(line)?;
        Self::new(s, p, o)
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Distinct variables in subject, predicate, object order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::with_capacity(3);
        for v in self.terms().into_iter().filter_map(Term::as_var) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| !t.is_variable())
    }

    /// True iff some mapping over `vars()` turns this pattern into `triple`.
    pub fn matches(&self, triple: &Triple) -> bool {
        self.induced_mapping(triple).is_some()
    }

    /// The unique mapping `mu` with `dom(mu) = vars(self)` and
    /// `apply(mu, self) = triple`, if one exists.
    pub fn induced_mapping(&self, triple: &Triple) -> Option<SolutionMapping> {
        let mut mu = SolutionMapping::new();
        for (pattern_term, term) in self.terms().into_iter().zip(triple.terms()) {
            match pattern_term.as_var() {
                Some(v) => match mu.get(&v) {
                    Some(bound) if bound != term => return None,
                    Some(_) => {}
                    None => {
                        mu.bind(v, term.clone()).ok()?;
                    }
                },
                None if pattern_term != term => return None,
                None => {}
            }
        }
        Some(mu)
    }

    /// Replaces every variable bound by `mu`; unbound variables stay.
    pub fn apply(&self, mu: &SolutionMapping) -> Result<TriplePattern, RdfError> {
        let subst = |t: &Term| -> Term {
            t.as_var()
                .and_then(|v| mu.get(&v).cloned())
                .unwrap_or_else(|| t.clone())
        };
        Self::new(subst(&self.subject), subst(&self.predicate), subst(&self.object))
    }

    /// Converts a fully bound pattern into a triple.
    pub fn to_triple(&self) -> Result<Triple, RdfError> {
        Triple::new(self.subject.clone(), self.predicate.clone(), self.object.clone())
    }
}

impl From<Triple> for TriplePattern {
    fn from(t: Triple) -> Self {
        Self { subject: t.subject, predicate: t.predicate, object: t.object }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Debug for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

fn parse_three_terms(line: &str) -> Result<[Term; 3], RdfError> {
    let mut rest = line.trim();
    let mut terms = Vec::with_capacity(3);
    for i in 0..3 {
        let (term, tail) = Term::parse_prefix(rest)?;
        terms.push(term);
        if i < 2 && !tail.starts_with([' ', '\t']) {
            return Err(RdfError::Syntax(format!("expected whitespace after term in {line:?}")));
        }
        rest = tail.trim_start();
    }
    let rest = rest.strip_prefix('.').unwrap_or(rest).trim();
    if !rest.is_empty() {
        return Err(RdfError::Syntax(format!("unexpected trailing input {rest:?}")));
    }
    let [s, p, o]: [Term; 3] = terms.try_into().expect("three terms");
    Ok([s, p, o])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(s: &str) -> TriplePattern {
        TriplePattern::parse_line(s).unwrap()
    }

    fn t(s: &str) -> Triple {
        Triple::parse_line(s).unwrap()
    }

    fn mu(pairs: &[(&str, &str)]) -> SolutionMapping {
        SolutionMapping::from_pairs(pairs.iter().map(|(v, t)| (*v, Term::parse(t).unwrap()))).unwrap()
    }

    #[test]
    fn matches_examples() {
        assert!(tp("?x <urn:p> ?y").matches(&t("<urn:a> <urn:p> <urn:b>")));
        assert!(!tp("?x <urn:p> ?x").matches(&t("<urn:a> <urn:p> <urn:b>")));
        assert!(tp("?x <urn:p> ?x").matches(&t("<urn:a> <urn:p> <urn:a>")));
        assert!(!tp("?x <urn:q> ?y").matches(&t("<urn:a> <urn:p> <urn:b>")));
    }

    #[test]
    fn apply_examples() {
        let p = tp("?x <urn:p> ?y");
        assert_eq!(p.apply(&mu(&[("x", "<urn:a>")])).unwrap(), tp("<urn:a> <urn:p> ?y"));
        assert_eq!(p.apply(&SolutionMapping::new()).unwrap(), p);
        let err = tp("?x <urn:p> <urn:b>").apply(&mu(&[("x", "\"lit\"")])).unwrap_err();
        assert!(matches!(err, RdfError::IllTypedPosition { position: Position::Subject, .. }));
        let err = tp("<urn:a> ?p <urn:b>").apply(&mu(&[("p", "\"lit\"")])).unwrap_err();
        assert!(matches!(err, RdfError::IllTypedPosition { position: Position::Predicate, .. }));
    }

    #[test]
    fn vars_are_distinct() {
        assert_eq!(tp("?x <urn:p> ?x").vars().len(), 1);
        assert_eq!(tp("?x ?p ?y").vars().len(), 3);
        assert!(tp("<urn:a> <urn:p> \"v\"").vars().is_empty());
    }

    #[test]
    fn triple_rejects_variables_and_bad_positions() {
        assert!(Triple::parse_line("?x <urn:p> <urn:b> .").is_err());
        assert!(Triple::parse_line("\"l\" <urn:p> <urn:b> .").is_err());
        assert!(Triple::parse_line("<urn:a> \"l\" <urn:b> .").is_err());
        assert!(TriplePattern::parse_line("?x \"l\" ?y").is_err());
    }

    #[test]
    fn line_syntax() {
        let triple = t("<urn:a> <urn:p> \"two words\" .");
        assert_eq!(triple.object.lexical(), "two words");
        assert_eq!(triple.to_string(), "<urn:a> <urn:p> \"two words\" .");
        assert!(Triple::parse_line("<urn:a><urn:p> <urn:b> .").is_err());
        assert!(Triple::parse_line("<urn:a> <urn:p> <urn:b> . x").is_err());
    }
}
