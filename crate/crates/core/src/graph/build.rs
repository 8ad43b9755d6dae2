use std::collections::HashSet;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::{ns, rdf_type, Graph, GraphError, Iri, Literal, Triple, COMPOSER_BASE, TRACK_BASE};
use crate::campaign::fnv1a;
use crate::catalog::TrackRecord;
use crate::vocabulary::{slugify, Category, Vocabularies};

/// Everything but RFC 3986 unreserved characters.
const SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

pub fn track_iri(europeana_id: &str) -> Iri {
    Iri::from_trusted(format!("{TRACK_BASE}{}", utf8_percent_encode(europeana_id, SEGMENT)))
}

/// Composer IRIs are minted from the slugified name, so records naming the
/// same composer share one node.
pub fn composer_iri(name: &str) -> Iri {
    let slug = slugify(name);
    let local = if slug.is_empty() { format!("anon-{:016x}", fnv1a(name.as_bytes())) } else { slug };
    Iri::from_trusted(format!("{COMPOSER_BASE}{}", utf8_percent_encode(&local, SEGMENT)))
}

fn predicate_for(category: Category) -> Iri {
    match category {
        Category::Genre => ns("hasGenre"),
        Category::Emotion => ns("hasEmotion"),
        Category::Instrument => ns("hasInstrument"),
    }
}

/// Compiles records into a graph: a `Song` node per track with its literal
/// fields, a shared `Composer` node, one edge per tag and one literal per
/// comment.
pub fn build_graph(records: &[TrackRecord], vocab: &Vocabularies) -> Result<Graph, GraphError> {
    let mut graph = Graph::new();
    let mut seen = HashSet::new();
    let ty = rdf_type();
    for r in records {
        if !seen.insert(r.europeana_id.as_str()) {
            return Err(GraphError::DuplicateTrackId(r.europeana_id.clone()));
        }
        let track = track_iri(&r.europeana_id);
        let mut add =
            |p: Iri, o: super::Object| graph.insert(Triple { subject: track.clone(), predicate: p, object: o });
        add(ty.clone(), ns("Song").into());
        add(ns("europeanaId"), Literal::string(&r.europeana_id).into());
        if let Some(title) = &r.title {
            add(ns("title"), Literal::string(title).into());
        }
        if let Some(year) = r.year {
            add(ns("year"), Literal::year(year).into());
        }
        if let Some(d) = r.duration_ms {
            let d = i64::try_from(d).map_err(|_| GraphError::InvalidLiteral {
                lexical: d.to_string(),
                datatype: super::Datatype::Integer,
            })?;
            add(ns("durationMs"), Literal::integer(d).into());
        }
        if let Some(publisher) = &r.publisher {
            add(ns("publisher"), Literal::string(publisher).into());
        }
        if let Some(place) = &r.place {
            add(ns("place"), Literal::string(place).into());
        }
        if let Some(url) = &r.audio_url {
            add(ns("audioUrl"), Literal::string(url).into());
        }
        for category in Category::ALL {
            for id in r.tags(category) {
                let term = vocab.get(category).get(id).ok_or_else(|| GraphError::UnknownTerm(id.clone()))?;
                add(predicate_for(category), Iri::new(&term.uri)?.into());
            }
        }
        for comment in &r.comments {
            add(ns("hasComment"), Literal::string(comment).into());
        }
        if let Some(name) = &r.composer {
            let composer = composer_iri(name);
            add(ns("hasComposer"), composer.clone().into());
            let mut add =
                |p: Iri, o: super::Object| graph.insert(Triple { subject: composer.clone(), predicate: p, object: o });
            add(ty.clone(), ns("Composer").into());
            add(ns("name"), Literal::string(name).into());
            if let Some(birth) = r.composer_birth {
                add(ns("birthDate"), Literal::string(birth.to_string()).into());
                add(ns("birthYear"), Literal::year(birth.year).into());
            }
            if let Some(death) = r.composer_death {
                add(ns("deathDate"), Literal::string(death.to_string()).into());
                add(ns("deathYear"), Literal::year(death.year).into());
            }
            if let Some(bio) = &r.biography {
                add(ns("biography"), Literal::string(bio).into());
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::PartialDate;
    use crate::graph::Object;
    use crate::vocabulary::builtin_vocabularies;

    fn record(id: &str, composer: &str) -> TrackRecord {
        TrackRecord {
            title: Some("Blue in Green".into()),
            year: Some(1959),
            composer: Some(composer.into()),
            genres: ["jazz".to_string()].into(),
            emotions: ["calmness".to_string()].into(),
            ..TrackRecord::new(id)
        }
    }

    #[test]
    fn per_record_triple_count() {
        let v = builtin_vocabularies();
        let g = build_graph(&[record("t1", "Bill Evans")], &v).unwrap();
        // type + id + title + year + hasComposer + (composer type + name) + 2 tags
        assert_eq!(g.len(), 9);
        let track = track_iri("t1");
        let jazz = Object::Iri(Iri::new(&v.term("jazz").unwrap().uri).unwrap());
        assert!(g.contains(&Triple::new(track, ns("hasGenre"), jazz)));
    }

    #[test]
    fn shared_composer_node() {
        let v = builtin_vocabularies();
        let g = build_graph(&[record("t1", "Bill Evans"), record("t2", "bill  evans")], &v).unwrap();
        assert_eq!(g.instances_of(&ns("Composer")).len(), 1);
        assert_eq!(g.instances_of(&ns("Song")).len(), 2);
    }

    #[test]
    fn composer_dates() {
        let v = builtin_vocabularies();
        let mut r = record("t1", "Johannes Brahms");
        r.composer_birth = Some("1833-05-07".parse::<PartialDate>().unwrap());
        r.composer_death = Some(PartialDate::year(1897));
        let g = build_graph(&[r], &v).unwrap();
        let c = composer_iri("Johannes Brahms");
        let years: Vec<_> = g.objects(&c, &ns("birthYear")).collect();
        assert_eq!(years, [&Object::Literal(Literal::year(1833))]);
        assert_eq!(g.objects(&c, &ns("deathDate")).count(), 1);
    }

    #[test]
    fn empty_and_duplicates() {
        let v = builtin_vocabularies();
        assert!(build_graph(&[], &v).unwrap().is_empty());
        assert_eq!(
            build_graph(&[record("t1", "a"), record("t1", "b")], &v),
            Err(GraphError::DuplicateTrackId("t1".into()))
        );
    }

    #[test]
    fn minting_is_injective_enough() {
        assert_ne!(track_iri("/a"), track_iri("a"));
        assert_eq!(track_iri("/2059208/x y").as_str(), "https://w3id.org/crowdkb/track/%2F2059208%2Fx%20y");
        assert!(composer_iri("???").as_str().starts_with("https://w3id.org/crowdkb/composer/anon-"));
        assert_eq!(composer_iri("Dvořák").as_str(), "https://w3id.org/crowdkb/composer/dvo%C5%99%C3%A1k");
    }
}
