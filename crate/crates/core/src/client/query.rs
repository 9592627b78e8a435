use std::fmt::Write as _;
use std::path::Path;

use crate::rdf::{RdfError, TriplePattern, Var};

/// A basic graph pattern: a non-empty list of triple patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BgpQuery {
    pub name: String,
    pub patterns: Vec<TriplePattern>,
}

#[derive(Debug, thiserror::Error)]
pub enum QueryFileError {
    #[error("cannot read query file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Pattern { line: usize, source: RdfError },
    #[error("query {0:?} has no triple patterns")]
    Empty(String),
}

impl BgpQuery {
    pub fn new(name: impl Into<String>, patterns: Vec<TriplePattern>) -> Result<Self, QueryFileError> {
        let name = name.into();
        if patterns.is_empty() {
            return Err(QueryFileError::Empty(name));
        }
        Ok(Self { name, patterns })
    }

    /// Distinct variables in order of first appearance.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for v in self.patterns.iter().flat_map(TriplePattern::vars) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

/// Parses a query file: blocks separated by blank lines, each optionally
/// headed by `# name: <name>`, then one triple pattern per line.
pub fn parse_queries(text: &str) -> Result<Vec<BgpQuery>, QueryFileError> {
    let mut queries = Vec::new();
    let mut name: Option<String> = None;
    let mut patterns = Vec::new();
    let flush = |name: &mut Option<String>, patterns: &mut Vec<TriplePattern>, queries: &mut Vec<BgpQuery>| {
        if patterns.is_empty() {
            return match name.take() {
                Some(n) => Err(QueryFileError::Empty(n)),
                None => Ok(()),
            };
        }
        let n = name.take().unwrap_or_else(|| format!("Q{}", queries.len() + 1));
        queries.push(BgpQuery { name: n, patterns: std::mem::take(patterns) });
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            flush(&mut name, &mut patterns, &mut queries)?;
        } else if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("name:") {
                flush(&mut name, &mut patterns, &mut queries)?;
                name = Some(n.trim().to_owned());
            }
        } else {
            let tp = TriplePattern::parse_line(line).map_err(|source| QueryFileError::Pattern { line: i + 1, source })?;
            patterns.push(tp);
        }
    }
    flush(&mut name, &mut patterns, &mut queries)?;
    Ok(queries)
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<BgpQuery>, QueryFileError> {
    parse_queries(&std::fs::read_to_string(path)?)
}

pub fn format_queries(queries: &[BgpQuery]) -> String {
    let mut out = String::new();
    for (i, q) in queries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "# name: {}", q.name).unwrap();
        for tp in &q.patterns {
            writeln!(out, "{tp}").unwrap();
        }
    }
    out
}
