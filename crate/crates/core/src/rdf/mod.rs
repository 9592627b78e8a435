//! RDF terms, triples, triple patterns and solution mappings.

mod mapping;
mod term;
mod triple;

pub use mapping::{MappingSequence, SolutionMapping};
pub use term::{Term, TermKind, Var};
pub use triple::{Position, Triple, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RdfError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{term} cannot appear in {position} position")]
    IllTypedPosition { term: Term, position: Position },
    #[error("variable {0} in a ground triple")]
    VariableInTriple(Term),
    #[error("variable {0} bound to non-ground value {1}")]
    VariableAsValue(Var, Term),
    #[error("variable {0} bound twice")]
    DuplicateBinding(Var),
    #[error("duplicate mapping {{{0}}} in sequence")]
    DuplicateMapping(String),
    #[error("mappings are not compatible")]
    IncompatibleMappings,
}
