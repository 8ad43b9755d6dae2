//! A small conjunctive graph-pattern language:
//!
//! ```text
//! prefix dbo: <http://dbpedia.org/ontology/>
//! select ?t ?y where { ?t hasComposer ?c . ?c birthYear ?y . } filter ?y <= 1900
//! ```
//!
//! Bare names expand through the empty prefix, `a` and `type` mean
//! `rdf:type`. Results use set semantics and come back in canonical order.

mod eval;
mod parser;

pub use eval::{evaluate_query, BindingTable};
pub use parser::{parse_query, parse_query_with_prefixes};

use std::fmt;

use thiserror::Error;

use crate::graph::{Iri, Literal, Object};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at {line}:{col}: {message}")]
    SyntaxError { line: usize, col: usize, message: String },
    #[error("unknown prefix '{prefix}:' at {line}:{col}")]
    UnknownPrefix { prefix: String, line: usize, col: usize },
    #[error("selected variable ?{0} does not occur in any pattern")]
    UnboundSelectVariable(String),
    #[error("filtered variable ?{0} does not occur in any pattern")]
    UnboundFilterVariable(String),
    #[error("filter on ?{var} compares {found} but the variable only binds IRIs")]
    TypeMismatch { var: String, found: String },
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::SyntaxError { .. } => "SyntaxError",
            QueryError::UnknownPrefix { .. } => "UnknownPrefix",
            QueryError::UnboundSelectVariable(_) => "UnboundSelectVariable",
            QueryError::UnboundFilterVariable(_) => "UnboundFilterVariable",
            QueryError::TypeMismatch { .. } => "TypeMismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Var(String),
    Iri(Iri),
    Literal(Literal),
}

impl PatternTerm {
    pub fn var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl From<Iri> for PatternTerm {
    fn from(i: Iri) -> Self {
        PatternTerm::Iri(i)
    }
}

impl From<Literal> for PatternTerm {
    fn from(l: Literal) -> Self {
        PatternTerm::Literal(l)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Iri(i) => write!(f, "<{i}>"),
            PatternTerm::Literal(l) => write!(f, "{}", FilterValue::Literal(l.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<PatternTerm>,
        predicate: impl Into<PatternTerm>,
        object: impl Into<PatternTerm>,
    ) -> Self {
        TriplePattern { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }

    pub fn terms(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    pub const ALL: [Comparator; 6] =
        [Comparator::Eq, Comparator::Ne, Comparator::Lt, Comparator::Le, Comparator::Gt, Comparator::Ge];

    pub fn as_str(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, Comparator::Eq | Comparator::Ne)
    }

    pub fn test(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Eq => ord == Equal,
            Comparator::Ne => ord != Equal,
            Comparator::Lt => ord == Less,
            Comparator::Le => ord != Greater,
            Comparator::Gt => ord == Greater,
            Comparator::Ge => ord != Less,
        }
    }
}

/// Right-hand side of a filter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FilterValue {
    Integer(i64),
    Literal(Literal),
    Iri(Iri),
}

impl FilterValue {
    fn kind(&self) -> &'static str {
        match self {
            FilterValue::Integer(_) => "a number",
            FilterValue::Literal(_) => "a literal",
            FilterValue::Iri(_) => "an IRI",
        }
    }

    /// Numbers compare against integer and year literals, strings against
    /// string literals, IRIs against IRIs. Any other pairing is no match.
    pub fn compare(&self, op: Comparator, value: &Object) -> bool {
        let ord = match (self, value) {
            (FilterValue::Integer(n), Object::Literal(l)) => l.numeric_value().map(|v| v.cmp(n)),
            (FilterValue::Literal(want), Object::Literal(l)) => match (want.numeric_value(), l.numeric_value()) {
                (Some(a), Some(b)) => Some(b.cmp(&a)),
                (None, None) if want.datatype() == l.datatype() => Some(l.lexical().cmp(want.lexical())),
                _ => None,
            },
            (FilterValue::Iri(want), Object::Iri(i)) if !op.is_ordering() => Some(i.cmp(want)),
            _ => None,
        };
        ord.is_some_and(|o| op.test(o))
    }
}

impl fmt::Display for FilterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterValue::Integer(n) => write!(f, "{n}"),
            FilterValue::Iri(i) => write!(f, "<{i}>"),
            FilterValue::Literal(l) => write!(f, "{}", Object::Literal(l.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filter {
    pub var: String,
    pub op: Comparator,
    pub value: FilterValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryAst {
    pub select_vars: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl QueryAst {
    /// Distinct pattern variables in first-occurrence order.
    pub fn pattern_vars(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for v in self.patterns.iter().flat_map(|p| p.terms()).filter_map(PatternTerm::var) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Checks the invariants `parse_query` guarantees, for hand-built ASTs.
    pub fn validate(&self) -> Result<(), QueryError> {
        if self.patterns.is_empty() {
            return Err(QueryError::SyntaxError {
                line: 1,
                col: 1,
                message: "at least one pattern is required".into(),
            });
        }
        let vars = self.pattern_vars();
        if let Some(v) = self.select_vars.iter().find(|v| !vars.contains(&v.as_str())) {
            return Err(QueryError::UnboundSelectVariable(v.clone()));
        }
        for f in &self.filters {
            if !vars.contains(&f.var.as_str()) {
                return Err(QueryError::UnboundFilterVariable(f.var.clone()));
            }
            let iri_only = self
                .patterns
                .iter()
                .any(|p| p.subject.var() == Some(f.var.as_str()) || p.predicate.var() == Some(f.var.as_str()));
            if iri_only && !matches!(f.value, FilterValue::Iri(_)) {
                return Err(QueryError::TypeMismatch { var: f.var.clone(), found: f.value.kind().into() });
            }
            if matches!(f.value, FilterValue::Iri(_)) && f.op.is_ordering() {
                return Err(QueryError::TypeMismatch {
                    var: f.var.clone(),
                    found: "an IRI under an ordering comparator".into(),
                });
            }
        }
        Ok(())
    }
}

/// Prints with full IRIs, so the output parses back to the same AST under
/// any prefix map.
impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("select")?;
        for v in &self.select_vars {
            write!(f, " ?{v}")?;
        }
        f.write_str(" where {")?;
        for p in &self.patterns {
            write!(f, " {} {} {} .", p.subject, p.predicate, p.object)?;
        }
        f.write_str(" }")?;
        for flt in &self.filters {
            write!(f, " filter ?{} {} {}", flt.var, flt.op.as_str(), flt.value)?;
        }
        Ok(())
    }
}
