//! Triple graph compiled from enriched records, with derived classes and
//! externally resolved facts.

mod axioms;
mod build;
mod external;
mod ntriples;

pub use axioms::{
    calm_jazz_song, default_axioms, materialize_axioms, nineteenth_century_composer, ClassAxiom, Condition,
};
pub use build::{build_graph, composer_iri, track_iri};
pub use external::{integrate_external, FactResolver, FixtureResolver, ResolveReport};
pub use ntriples::{parse_graph, read_graph, serialize_graph, write_graph};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocabulary::{is_absolute_uri, DEFAULT_NAMESPACE};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const PROV: &str = "http://www.w3.org/ns/prov#";
pub const TRACK_BASE: &str = "https://w3id.org/crowdkb/track/";
pub const COMPOSER_BASE: &str = "https://w3id.org/crowdkb/composer/";
pub const FACT_BASE: &str = "https://w3id.org/crowdkb/fact/";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid IRI '{0}'")]
    InvalidIri(String),
    #[error("invalid {datatype} literal '{lexical}'")]
    InvalidLiteral { lexical: String, datatype: Datatype },
    #[error("duplicate track id '{0}'")]
    DuplicateTrackId(String),
    #[error("unknown term '{0}'")]
    UnknownTerm(String),
    #[error("predicate <{0}> is outside every known namespace")]
    UnknownPredicate(String),
    #[error("invalid axiom for <{class}>: {message}")]
    InvalidAxiom { class: String, message: String },
    #[error("syntax error on line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("cannot read graph: {0}")]
    ReadFailure(String),
    #[error("cannot write graph: {0}")]
    WriteFailure(String),
}

impl GraphError {
    /// Stable machine-readable code, equal to the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::InvalidIri(_) => "InvalidIri",
            GraphError::InvalidLiteral { .. } => "InvalidLiteral",
            GraphError::DuplicateTrackId(_) => "DuplicateTrackId",
            GraphError::UnknownTerm(_) => "UnknownTerm",
            GraphError::UnknownPredicate(_) => "UnknownPredicate",
            GraphError::InvalidAxiom { .. } => "InvalidAxiom",
            GraphError::SyntaxError { .. } => "SyntaxError",
            GraphError::ReadFailure(_) => "ReadFailure",
            GraphError::WriteFailure(_) => "WriteFailure",
        }
    }
}

/// An absolute IRI. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, GraphError> {
        let value = value.as_ref();
        let forbidden = |c: char| c.is_control() || matches!(c, '\\' | '{' | '}' | '|' | '^' | '`');
        if is_absolute_uri(value) && !value.contains(forbidden) {
            Ok(Iri(Arc::from(value)))
        } else {
            Err(GraphError::InvalidIri(value.to_string()))
        }
    }

    /// For IRIs assembled from known-good constants.
    pub(crate) fn from_trusted(value: String) -> Self {
        debug_assert!(Iri::new(&value).is_ok(), "{value}");
        Iri(Arc::from(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Iri::new(s).map_err(serde::de::Error::custom)
    }
}

/// IRI in the ontology namespace.
pub fn ns(local: &str) -> Iri {
    Iri::from_trusted(format!("{DEFAULT_NAMESPACE}{local}"))
}

pub fn rdf_type() -> Iri {
    Iri::from_trusted(format!("{RDF}type"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Datatype {
    String,
    Integer,
    Year,
}

impl Datatype {
    pub fn iri(self) -> String {
        match self {
            Datatype::String => format!("{XSD}string"),
            Datatype::Integer => format!("{XSD}integer"),
            Datatype::Year => format!("{XSD}gYear"),
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Year => "year",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, GraphError> {
        let lexical = lexical.into();
        let ok = match datatype {
            Datatype::String => true,
            Datatype::Integer => lexical.parse::<i64>().is_ok() && !lexical.starts_with('+'),
            Datatype::Year => {
                let digits = lexical.strip_prefix('-').unwrap_or(&lexical);
                digits.len() >= 4 && digits.bytes().all(|b| b.is_ascii_digit())
            }
        };
        if ok {
            Ok(Literal { lexical, datatype })
        } else {
            Err(GraphError::InvalidLiteral { lexical, datatype })
        }
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal { lexical: value.into(), datatype: Datatype::String }
    }

    pub fn integer(value: i64) -> Self {
        Literal { lexical: value.to_string(), datatype: Datatype::Integer }
    }

    pub fn year(value: i32) -> Self {
        let lexical = if value < 0 { format!("-{:04}", -(value as i64)) } else { format!("{value:04}") };
        Literal { lexical, datatype: Datatype::Year }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    /// Integer value of integer and year literals.
    pub fn numeric_value(&self) -> Option<i64> {
        match self.datatype {
            Datatype::Integer | Datatype::Year => self.lexical.parse().ok(),
            Datatype::String => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Object {
    Iri(Iri),
    Literal(Literal),
}

impl Object {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Object::Iri(i) => Some(i),
            Object::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Object::Literal(l) => Some(l),
            Object::Iri(_) => None,
        }
    }
}

impl From<Iri> for Object {
    fn from(i: Iri) -> Self {
        Object::Iri(i)
    }
}

impl From<Literal> for Object {
    fn from(l: Literal) -> Self {
        Object::Literal(l)
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Iri(i) => write!(f, "<{i}>"),
            Object::Literal(l) => f.write_str(&ntriples::format_literal(l)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Object,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Object>) -> Self {
        Triple { subject, predicate, object: object.into() }
    }
}

/// Prefixes every graph starts with. The empty prefix is the ontology
/// namespace.
pub fn default_prefixes() -> BTreeMap<String, String> {
    [
        ("", DEFAULT_NAMESPACE),
        ("rdf", RDF),
        ("xsd", XSD),
        ("prov", PROV),
        ("track", TRACK_BASE),
        ("composer", COMPOSER_BASE),
        ("fact", FACT_BASE),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// A set of triples with a namespace prefix map. Append-only; subject,
/// predicate and object indexes are kept for pattern lookups.
#[derive(Debug, Clone)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
    by_subject: HashMap<Iri, Vec<Triple>>,
    by_predicate: HashMap<Iri, Vec<Triple>>,
    by_object: HashMap<Object, Vec<Triple>>,
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new()
    }
}

/// Graphs compare by their triple sets only.
impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

impl FromIterator<Triple> for Graph {
    fn from_iter<T: IntoIterator<Item = Triple>>(iter: T) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

impl Extend<Triple> for Graph {
    fn extend<T: IntoIterator<Item = Triple>>(&mut self, iter: T) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph {
            triples: BTreeSet::new(),
            prefixes: default_prefixes(),
            by_subject: HashMap::new(),
            by_predicate: HashMap::new(),
            by_object: HashMap::new(),
        }
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.triples.contains(&triple) {
            return false;
        }
        self.by_subject.entry(triple.subject.clone()).or_default().push(triple.clone());
        self.by_predicate.entry(triple.predicate.clone()).or_default().push(triple.clone());
        self.by_object.entry(triple.object.clone()).or_default().push(triple.clone());
        self.triples.insert(triple);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Triples in canonical (sorted) order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn set_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    /// Whether `iri` falls under one of the prefix namespaces.
    pub fn in_known_namespace(&self, iri: &Iri) -> bool {
        self.prefixes.values().any(|ns| iri.as_str().starts_with(ns.as_str()))
    }

    /// Shortest `prefix:local` form of an IRI, if any prefix applies.
    pub fn compact(&self, iri: &Iri) -> Option<String> {
        self.prefixes
            .iter()
            .filter(|(_, ns)| iri.as_str().starts_with(ns.as_str()) && iri.as_str().len() > ns.len())
            .max_by_key(|(_, ns)| ns.len())
            .map(|(p, ns)| format!("{p}:{}", &iri.as_str()[ns.len()..]))
    }

    /// All triples matching the bound positions.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&Iri>,
        predicate: Option<&Iri>,
        object: Option<&Object>,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        let empty: &'a [Triple] = &[];
        let mut candidates: Option<&'a [Triple]> = None;
        let mut narrow = |list: Option<&'a Vec<Triple>>| {
            let list = list.map_or(empty, Vec::as_slice);
            if candidates.is_none_or(|c| list.len() < c.len()) {
                candidates = Some(list);
            }
        };
        if let Some(s) = subject {
            narrow(self.by_subject.get(s));
        }
        if let Some(p) = predicate {
            narrow(self.by_predicate.get(p));
        }
        if let Some(o) = object {
            narrow(self.by_object.get(o));
        }
        let (s, p, o) = (subject.cloned(), predicate.cloned(), object.cloned());
        let keep = move |t: &&Triple| {
            s.as_ref().is_none_or(|s| &t.subject == s)
                && p.as_ref().is_none_or(|p| &t.predicate == p)
                && o.as_ref().is_none_or(|o| &t.object == o)
        };
        match candidates {
            Some(list) => Box::new(list.iter().filter(keep)),
            None => Box::new(self.triples.iter()),
        }
    }

    pub fn objects<'a>(&'a self, subject: &Iri, predicate: &Iri) -> impl Iterator<Item = &'a Object> + 'a {
        self.matching(Some(subject), Some(predicate), None).map(|t| &t.object)
    }

    /// Subjects typed with `class`, sorted.
    pub fn instances_of(&self, class: &Iri) -> Vec<Iri> {
        let class = Object::Iri(class.clone());
        let mut out: Vec<Iri> =
            self.matching(None, Some(&rdf_type()), Some(&class)).map(|t| t.subject.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn subjects(&self) -> BTreeSet<&Iri> {
        self.by_subject.keys().collect()
    }

    pub fn has_predicate(&self, predicate: &Iri) -> bool {
        self.by_predicate.contains_key(predicate)
    }

    /// Entities appearing as a subject or as an IRI object.
    pub fn mentions(&self, iri: &Iri) -> bool {
        self.by_subject.contains_key(iri) || self.by_object.contains_key(&Object::Iri(iri.clone()))
    }
}
