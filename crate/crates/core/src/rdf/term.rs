use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use super::RdfError;

/// The four kinds of RDF term handled here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Iri,
    Literal,
    BlankNode,
    Variable,
}

/// An RDF term (or SPARQL variable) held in its canonical wire form.
///
/// The canonical form is `<iri>`, `"literal"` (with `\\`, `\"`, `\n`, `\r`
/// and `\t` escaped), `_:label` or `?name`. Equality, hashing and ordering
/// all operate on that string, so term order is canonical string order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    repr: Arc<str>,
}

impl Term {
    pub fn iri(iri: &str) -> Result<Self, RdfError> {
        validate_iri(iri)?;
        Ok(Self::from_repr(format!("<{iri}>")))
    }

    pub fn literal(lexical: &str) -> Self {
        let mut repr = String::with_capacity(lexical.len() + 2);
        repr.push('"');
        for c in lexical.chars() {
            match c {
                '\\' => repr.push_str("\\\\"),
                '"' => repr.push_str("\\\""),
                '\n' => repr.push_str("\\n"),
                '\r' => repr.push_str("\\r"),
                '\t' => repr.push_str("\\t"),
                c => repr.push(c),
            }
        }
        repr.push('"');
        Self::from_repr(repr)
    }

    pub fn blank(label: &str) -> Result<Self, RdfError> {
        if label.is_empty() || !label.chars().all(is_label_char) {
            return Err(RdfError::InvalidBlankNode(label.to_owned()));
        }
        Ok(Self::from_repr(format!("_:{label}")))
    }

    pub fn variable(name: &str) -> Result<Self, RdfError> {
        Ok(Var::new(name)?.into())
    }

    fn from_repr(repr: String) -> Self {
        Self { repr: repr.into() }
    }

    /// Parses exactly one term in canonical wire form.
    pub fn parse(input: &str) -> Result<Self, RdfError> {
        let (term, rest) = Self::parse_prefix(input)?;
        if !rest.is_empty() {
            return Err(RdfError::Syntax(format!("trailing input after term: {rest:?}")));
        }
        Ok(term)
    }

    /// Parses one term from the start of `input` and returns the unconsumed rest.
    pub fn parse_prefix(input: &str) -> Result<(Self, &str), RdfError> {
        let mut chars = input.char_indices();
        match chars.next() {
            Some((_, '<')) => {
                let end = input
                    .find('>')
                    .ok_or_else(|| RdfError::Syntax(format!("unterminated IRI in {input:?}")))?;
                Ok((Self::iri(&input[1..end])?, &input[end + 1..]))
            }
            Some((_, '"')) => {
                let mut lexical = String::new();
                let mut escaped = false;
                for (i, c) in chars {
                    if escaped {
                        lexical.push(match c {
                            '\\' => '\\',
                            '"' => '"',
                            'n' => '\n',
                            'r' => '\r',
                            't' => '\t',
                            other => {
                                return Err(RdfError::Syntax(format!(
                                    "unknown escape \\{other} in literal"
                                )))
                            }
                        });
                        escaped = false;
                    } else if c == '\\' {
                        escaped = true;
                    } else if c == '"' {
                        return Ok((Self::literal(&lexical), &input[i + 1..]));
                    } else {
                        lexical.push(c);
                    }
                }
                Err(RdfError::Syntax(format!("unterminated literal in {input:?}")))
            }
            Some((_, '?')) => {
                let end = input[1..]
                    .find(|c: char| !is_var_char(c))
                    .map_or(input.len(), |i| i + 1);
                Ok((Self::variable(&input[1..end])?, &input[end..]))
            }
            Some((_, '_')) if input.starts_with("_:") => {
                let end = input[2..]
                    .find(|c: char| !is_label_char(c))
                    .map_or(input.len(), |i| i + 2);
                Ok((Self::blank(&input[2..end])?, &input[end..]))
            }
            _ => Err(RdfError::Syntax(format!("expected a term at {input:?}"))),
        }
    }

    pub fn kind(&self) -> TermKind {
        match self.repr.as_bytes()[0] {
            b'<' => TermKind::Iri,
            b'"' => TermKind::Literal,
            b'?' => TermKind::Variable,
            _ => TermKind::BlankNode,
        }
    }

    pub fn is_variable(&self) -> bool {
        self.kind() == TermKind::Variable
    }

    pub fn is_literal(&self) -> bool {
        self.kind() == TermKind::Literal
    }

    pub fn as_var(&self) -> Option<Var> {
        self.is_variable().then(|| Var { repr: self.repr.clone() })
    }

    /// The canonical wire form.
    pub fn as_str(&self) -> &str {
        &self.repr
    }

    /// The lexical value without delimiters; literal escapes are undone.
    pub fn lexical(&self) -> Cow<'_, str> {
        match self.kind() {
            TermKind::Iri => Cow::Borrowed(&self.repr[1..self.repr.len() - 1]),
            TermKind::Literal => {
                let inner = &self.repr[1..self.repr.len() - 1];
                if !inner.contains('\\') {
                    return Cow::Borrowed(inner);
                }
                let mut out = String::with_capacity(inner.len());
                let mut escaped = false;
                for c in inner.chars() {
                    if escaped {
                        out.push(match c {
                            'n' => '\n',
                            'r' => '\r',
                            't' => '\t',
                            c => c,
                        });
                        escaped = false;
                    } else if c == '\\' {
                        escaped = true;
                    } else {
                        out.push(c);
                    }
                }
                Cow::Owned(out)
            }
            TermKind::BlankNode => Cow::Borrowed(&self.repr[2..]),
            TermKind::Variable => Cow::Borrowed(&self.repr[1..]),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.repr)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.repr)
    }
}

/// A variable name. Shares its storage with the `?name` term it came from.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    repr: Arc<str>,
}

impl Var {
    pub fn new(name: &str) -> Result<Self, RdfError> {
        if name.is_empty() || !name.chars().all(is_var_char) {
            return Err(RdfError::InvalidVariable(name.to_owned()));
        }
        Ok(Self { repr: format!("?{name}").into() })
    }

    pub fn name(&self) -> &str {
        &self.repr[1..]
    }

    pub fn as_term(&self) -> Term {
        Term { repr: self.repr.clone() }
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term { repr: v.repr }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.repr)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.repr)
    }
}

fn is_var_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_label_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn validate_iri(iri: &str) -> Result<(), RdfError> {
    let bad = || RdfError::InvalidIri(iri.to_owned());
    let colon = iri.find(':').ok_or_else(bad)?;
    let scheme = &iri[..colon];
    let mut scheme_chars = scheme.chars();
    match scheme_chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return Err(bad()),
    }
    if !scheme_chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')) {
        return Err(bad());
    }
    if iri
        .chars()
        .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return Err(bad());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(Term::iri("http://ex.org/a").unwrap().as_str(), "<http://ex.org/a>");
        assert_eq!(Term::literal("say \"hi\"").as_str(), r#""say \"hi\"""#);
        assert_eq!(Term::variable("x").unwrap().as_str(), "?x");
        assert_eq!(Term::blank("b0").unwrap().as_str(), "_:b0");
    }

    #[test]
    fn iri_must_be_absolute() {
        assert!(Term::iri("").is_err());
        assert!(Term::iri("relative/path").is_err());
        assert!(Term::iri("1http:x").is_err());
        assert!(Term::iri("http://ex.org/a b").is_err());
        assert!(Term::iri("urn:x").is_ok());
    }

    #[test]
    fn variable_names() {
        assert!(Term::variable("").is_err());
        assert!(Term::variable("a b").is_err());
        assert!(Term::variable("a,b").is_err());
        assert!(Term::variable("x_1").is_ok());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["<http://ex.org/a>", r#""a\\b\n\"c\"""#, "?x", "_:b", r#""""#] {
            let t = Term::parse(s).unwrap();
            assert_eq!(t.as_str(), s);
        }
        let lit = Term::parse(r#""a\nb""#).unwrap();
        assert_eq!(lit.lexical(), "a\nb");
        assert_eq!(Term::parse("<urn:a>").unwrap().lexical(), "urn:a");
    }

    #[test]
    fn parse_prefix_stops_at_delimiters() {
        let (t, rest) = Term::parse_prefix("?x,?y").unwrap();
        assert_eq!(t.as_str(), "?x");
        assert_eq!(rest, ",?y");
        let (t, rest) = Term::parse_prefix("<urn:a,b>;z").unwrap();
        assert_eq!(t.as_str(), "<urn:a,b>");
        assert_eq!(rest, ";z");
    }

    #[test]
    fn rejects_garbage() {
        assert!(Term::parse("abc").is_err());
        assert!(Term::parse("<urn:a").is_err());
        assert!(Term::parse("\"abc").is_err());
        assert!(Term::parse(r#""\q""#).is_err());
        assert!(Term::parse("<urn:a> ").is_err());
    }

    #[test]
    fn kinds() {
        assert_eq!(Term::parse("<urn:a>").unwrap().kind(), TermKind::Iri);
        assert_eq!(Term::parse("\"a\"").unwrap().kind(), TermKind::Literal);
        assert_eq!(Term::parse("_:a").unwrap().kind(), TermKind::BlankNode);
        assert_eq!(Term::parse("?a").unwrap().kind(), TermKind::Variable);
    }
}
