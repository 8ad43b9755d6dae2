use std::collections::BTreeMap;
use std::path::Path;

use super::{rdf_type, Graph, GraphError, Iri, Literal, Object, Triple, FACT_BASE, PROV, RDF};
use crate::campaign::fnv1a;

/// Source of additional facts about graph entities.
pub trait FactResolver {
    /// IRI recorded as the provenance of every fact this resolver supplies.
    fn source(&self) -> Iri;

    /// Facts about `entity`, or `None` when the entity is unknown.
    fn resolve(&self, entity: &Iri) -> Option<Vec<(Iri, Object)>>;
}

/// Resolver backed by a `entity_iri,predicate_iri,object` CSV file. An
/// object that parses as an absolute IRI is linked as one; anything else
/// becomes a string literal.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureResolver {
    source: Iri,
    facts: BTreeMap<Iri, Vec<(Iri, Object)>>,
}

impl FixtureResolver {
    pub fn parse(text: &str, source: Iri) -> Result<Self, GraphError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut facts: BTreeMap<Iri, Vec<(Iri, Object)>> = BTreeMap::new();
        for row in reader.records() {
            let row = row.map_err(|e| GraphError::SyntaxError {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = row.position().map_or(0, |p| p.line() as usize);
            let syntax = |message: String| GraphError::SyntaxError { line, message };
            if row.len() != 3 {
                return Err(syntax(format!("expected 3 fields, found {}", row.len())));
            }
            let entity = Iri::new(&row[0]).map_err(|e| syntax(e.to_string()))?;
            let predicate = Iri::new(&row[1]).map_err(|e| syntax(e.to_string()))?;
            let object = match Iri::new(&row[2]) {
                Ok(iri) => Object::Iri(iri),
                Err(_) => Object::Literal(Literal::string(&row[2])),
            };
            let entry = facts.entry(entity).or_default();
            if !entry.contains(&(predicate.clone(), object.clone())) {
                entry.push((predicate, object));
            }
        }
        Ok(FixtureResolver { source, facts })
    }

    pub fn load(path: &Path, source: Iri) -> Result<Self, GraphError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| GraphError::ReadFailure(format!("{}: {e}", path.display())))?;
        Self::parse(&text, source)
    }

    pub fn len(&self) -> usize {
        self.facts.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

impl FactResolver for FixtureResolver {
    fn source(&self) -> Iri {
        self.source.clone()
    }

    fn resolve(&self, entity: &Iri) -> Option<Vec<(Iri, Object)>> {
        self.facts.get(entity).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolveReport {
    Added { entity: Iri, facts: usize },
    Unresolved(Iri),
    NotInGraph(Iri),
}

fn fact_iri(t: &Triple) -> Iri {
    let key = format!("{}\u{1f}{}\u{1f}{}", t.subject, t.predicate, t.object);
    Iri::from_trusted(format!("{FACT_BASE}{:016x}", fnv1a(key.as_bytes())))
}

/// Adds resolver facts about `entities`. Each added triple is reified as a
/// fact node carrying `prov:wasDerivedFrom` the resolver source. Entities
/// the resolver does not know, or the graph does not mention, are reported
/// and skipped.
pub fn integrate_external(graph: &Graph, resolver: &dyn FactResolver, entities: &[Iri]) -> (Graph, Vec<ResolveReport>) {
    let mut out = graph.clone();
    let mut report = Vec::with_capacity(entities.len());
    let rdf = |local: &str| Iri::from_trusted(format!("{RDF}{local}"));
    let derived_from = Iri::from_trusted(format!("{PROV}wasDerivedFrom"));
    let source = resolver.source();
    for entity in entities {
        if !graph.mentions(entity) {
            report.push(ResolveReport::NotInGraph(entity.clone()));
            continue;
        }
        let Some(facts) = resolver.resolve(entity) else {
            report.push(ResolveReport::Unresolved(entity.clone()));
            continue;
        };
        for (predicate, object) in &facts {
            let triple = Triple::new(entity.clone(), predicate.clone(), object.clone());
            let fact = fact_iri(&triple);
            out.insert(triple);
            out.insert(Triple::new(fact.clone(), rdf_type(), rdf("Statement")));
            out.insert(Triple::new(fact.clone(), rdf("subject"), entity.clone()));
            out.insert(Triple::new(fact.clone(), rdf("predicate"), predicate.clone()));
            out.insert(Triple::new(fact.clone(), rdf("object"), object.clone()));
            out.insert(Triple::new(fact, derived_from.clone(), source.clone()));
        }
        report.push(ResolveReport::Added { entity: entity.clone(), facts: facts.len() });
    }
    (out, report)
}
