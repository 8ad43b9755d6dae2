use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ns, rdf_type, Graph, GraphError, Iri, Object, Triple};
use crate::vocabulary::Vocabularies;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// `(entity, predicate, object)` must be in the graph.
    HasValue { predicate: Iri, object: Iri },
    /// Some integer/year literal under `predicate` lies in `min..=max`.
    YearRange { predicate: Iri, min_year: i64, max_year: i64 },
}

impl Condition {
    fn predicate(&self) -> &Iri {
        match self {
            Condition::HasValue { predicate, .. } | Condition::YearRange { predicate, .. } => predicate,
        }
    }

    fn holds(&self, graph: &Graph, entity: &Iri) -> bool {
        match self {
            Condition::HasValue { predicate, object } => {
                graph.contains(&Triple::new(entity.clone(), predicate.clone(), object.clone()))
            }
            Condition::YearRange { predicate, min_year, max_year } => graph
                .objects(entity, predicate)
                .filter_map(|o| o.as_literal().and_then(|l| l.numeric_value()))
                .any(|y| (*min_year..=*max_year).contains(&y)),
        }
    }

    /// Entities that could satisfy this condition.
    fn candidates(&self, graph: &Graph) -> BTreeSet<Iri> {
        match self {
            Condition::HasValue { predicate, object } => graph
                .matching(None, Some(predicate), Some(&Object::Iri(object.clone())))
                .map(|t| t.subject.clone())
                .collect(),
            Condition::YearRange { predicate, .. } => {
                graph.matching(None, Some(predicate), None).map(|t| t.subject.clone()).collect()
            }
        }
    }
}

/// A derived class: entities meeting every condition become members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassAxiom {
    pub class_iri: Iri,
    pub conjuncts: Vec<Condition>,
}

impl ClassAxiom {
    pub fn new(class_iri: Iri, conjuncts: Vec<Condition>) -> Self {
        ClassAxiom { class_iri, conjuncts }
    }

    /// Entities currently satisfying all conjuncts, sorted.
    pub fn members(&self, graph: &Graph) -> Vec<Iri> {
        let Some((first, rest)) = self.conjuncts.split_first() else {
            return Vec::new();
        };
        first
            .candidates(graph)
            .into_iter()
            .filter(|e| first.holds(graph, e) && rest.iter().all(|c| c.holds(graph, e)))
            .collect()
    }

    fn check(&self, graph: &Graph) -> Result<(), GraphError> {
        if self.conjuncts.is_empty() {
            return Err(GraphError::InvalidAxiom {
                class: self.class_iri.to_string(),
                message: "no conditions".into(),
            });
        }
        if graph.has_predicate(&self.class_iri) {
            return Err(GraphError::InvalidAxiom {
                class: self.class_iri.to_string(),
                message: "class IRI is used as a predicate".into(),
            });
        }
        for c in &self.conjuncts {
            if !graph.in_known_namespace(c.predicate()) {
                return Err(GraphError::UnknownPredicate(c.predicate().to_string()));
            }
            if let Condition::YearRange { min_year, max_year, .. } = c {
                if min_year > max_year {
                    return Err(GraphError::InvalidAxiom {
                        class: self.class_iri.to_string(),
                        message: format!("empty year range {min_year}..={max_year}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Songs tagged with both Jazz and Calmness.
pub fn calm_jazz_song(vocab: &Vocabularies) -> Result<ClassAxiom, GraphError> {
    let uri =
        |id: &str| vocab.term(id).ok_or_else(|| GraphError::UnknownTerm(id.to_string())).and_then(|t| Iri::new(&t.uri));
    Ok(ClassAxiom::new(
        ns("CalmJazzSong"),
        vec![
            Condition::HasValue { predicate: ns("hasGenre"), object: uri("jazz")? },
            Condition::HasValue { predicate: ns("hasEmotion"), object: uri("calmness")? },
        ],
    ))
}

/// Composers born 1801 through 1900.
pub fn nineteenth_century_composer() -> ClassAxiom {
    ClassAxiom::new(
        ns("NineteenthCenturyComposer"),
        vec![Condition::YearRange { predicate: ns("birthYear"), min_year: 1801, max_year: 1900 }],
    )
}

pub fn default_axioms(vocab: &Vocabularies) -> Result<Vec<ClassAxiom>, GraphError> {
    Ok(vec![calm_jazz_song(vocab)?, nineteenth_century_composer()])
}

/// Adds `(entity, rdf:type, class)` for every member of every axiom,
/// repeating until nothing changes so axioms may build on each other's
/// classes. Existing triples are never removed.
pub fn materialize_axioms(graph: &Graph, axioms: &[ClassAxiom]) -> Result<Graph, GraphError> {
    for axiom in axioms {
        axiom.check(graph)?;
    }
    let mut out = graph.clone();
    let ty = rdf_type();
    loop {
        let mut added = false;
        for axiom in axioms {
            for entity in axiom.members(&out) {
                added |= out.insert(Triple::new(entity, ty.clone(), axiom.class_iri.clone()));
            }
        }
        if !added {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{PartialDate, TrackRecord};
    use crate::graph::{build_graph, composer_iri, track_iri};
    use crate::vocabulary::builtin_vocabularies;

    fn song(id: &str, emotion: &str, composer: &str, born: i32) -> TrackRecord {
        TrackRecord {
            composer: Some(composer.into()),
            composer_birth: Some(PartialDate::year(born)),
            genres: ["jazz".to_string()].into(),
            emotions: [emotion.to_string()].into(),
            ..TrackRecord::new(id)
        }
    }

    #[test]
    fn calm_jazz_membership() {
        let v = builtin_vocabularies();
        let g = build_graph(&[song("t1", "calmness", "a", 1850), song("t2", "joy", "b", 1901)], &v).unwrap();
        let out = materialize_axioms(&g, &default_axioms(&v).unwrap()).unwrap();
        assert_eq!(out.instances_of(&ns("CalmJazzSong")), vec![track_iri("t1")]);
        assert_eq!(out.instances_of(&ns("NineteenthCenturyComposer")), vec![composer_iri("a")]);
        assert!(g.iter().all(|t| out.contains(t)));
    }

    #[test]
    fn century_boundaries() {
        let v = builtin_vocabularies();
        let g = build_graph(
            &[
                song("t1", "joy", "c1800", 1800),
                song("t2", "joy", "c1801", 1801),
                song("t3", "joy", "c1900", 1900),
                song("t4", "joy", "c1901", 1901),
            ],
            &v,
        )
        .unwrap();
        let out = materialize_axioms(&g, &[nineteenth_century_composer()]).unwrap();
        assert_eq!(
            out.instances_of(&ns("NineteenthCenturyComposer")),
            vec![composer_iri("c1801"), composer_iri("c1900")]
        );
    }

    #[test]
    fn idempotent_and_no_match_is_identity() {
        let v = builtin_vocabularies();
        let g = build_graph(&[song("t1", "joy", "a", 1950)], &v).unwrap();
        let axioms = default_axioms(&v).unwrap();
        let once = materialize_axioms(&g, &axioms).unwrap();
        assert_eq!(once, g);
        let twice = materialize_axioms(&once, &axioms).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn chained_axioms_reach_fixpoint() {
        let v = builtin_vocabularies();
        let g = build_graph(&[song("t1", "calmness", "a", 1850)], &v).unwrap();
        let derived = ClassAxiom::new(
            ns("LateNightPick"),
            vec![Condition::HasValue { predicate: rdf_type(), object: ns("CalmJazzSong") }],
        );
        // the dependent axiom comes first; the loop must still find it
        let out = materialize_axioms(&g, &[derived, calm_jazz_song(&v).unwrap()]).unwrap();
        assert_eq!(out.instances_of(&ns("LateNightPick")), vec![track_iri("t1")]);
    }

    #[test]
    fn rejects_bad_axioms() {
        let g = Graph::new();
        let foreign = Iri::new("http://elsewhere.org/p").unwrap();
        let axiom = ClassAxiom::new(ns("X"), vec![Condition::HasValue { predicate: foreign, object: ns("Y") }]);
        assert!(matches!(materialize_axioms(&g, &[axiom]), Err(GraphError::UnknownPredicate(_))));
        assert!(matches!(
            materialize_axioms(&g, &[ClassAxiom::new(ns("X"), vec![])]),
            Err(GraphError::InvalidAxiom { .. })
        ));
        let v = builtin_vocabularies();
        let g = build_graph(&[song("t1", "joy", "a", 1950)], &v).unwrap();
        let bad = ClassAxiom::new(
            ns("hasGenre"),
            vec![Condition::HasValue { predicate: ns("hasGenre"), object: ns("Jazz") }],
        );
        assert!(matches!(materialize_axioms(&g, &[bad]), Err(GraphError::InvalidAxiom { .. })));
    }
}
