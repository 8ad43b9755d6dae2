//! Brute-force reference implementations and seeded input generators.
//! Each oracle restates its rule directly, without sharing code with the
//! library under test.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use crowdkb_core::catalog::PartialDate;
use crowdkb_core::graph::{ns, rdf_type, Datatype, Graph, Iri, Literal, Object, Triple};
use crowdkb_core::query::{Comparator, Filter, FilterValue, PatternTerm, QueryAst, TriplePattern};
use crowdkb_core::{Category, TagRow, TrackRecord, Vocabularies};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- moderation

/// Kept term ids per category. Emotion and genre: the top two tags with a
/// vote difference of at least two. Instrument: every tag whose difference
/// is above five. A term's tally is summed over everyone who proposed it.
/// Rank ties go to more upvotes, then the smaller term id.
pub fn brute_moderate(tags: &[TagRow]) -> BTreeMap<Category, BTreeSet<String>> {
    let mut totals: BTreeMap<(Category, String), (i64, i64)> = BTreeMap::new();
    for t in tags {
        let e = totals.entry((t.category, t.term_id.clone())).or_insert((0, 0));
        e.0 += i64::from(t.upvotes);
        e.1 += i64::from(t.downvotes);
    }
    let mut kept: BTreeMap<Category, BTreeSet<String>> = BTreeMap::new();
    for ((category, term), (up, down)) in &totals {
        let diff = up - down;
        let keep = match category {
            Category::Instrument => diff > 5,
            _ => {
                let better = totals
                    .iter()
                    .filter(|((c, other), (u2, d2))| {
                        let diff2 = u2 - d2;
                        c == category
                            && other != term
                            && (diff2 > diff || (diff2 == diff && (*u2 > *up || (*u2 == *up && other < term))))
                    })
                    .count();
                diff >= 2 && better < 2
            }
        };
        if keep {
            kept.entry(*category).or_default().insert(term.clone());
        }
    }
    kept
}

pub fn random_item_tags(rng: &mut ChaCha8Rng, vocab: &Vocabularies) -> Vec<TagRow> {
    let n = rng.random_range(0..=10);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..n {
        let category = *Category::ALL.choose(rng).unwrap();
        // a narrow term pool makes several users propose the same term
        let pool: Vec<&str> = vocab.get(category).terms().iter().take(4).map(|t| t.id.as_str()).collect();
        let term = pool.choose(rng).unwrap().to_string();
        let creator = format!("u{}", rng.random_range(0..4));
        if !seen.insert((category, term.clone(), creator.clone())) {
            continue;
        }
        out.push(TagRow {
            item_id: "item".into(),
            category,
            term_id: term,
            upvotes: rng.random_range(0..=12),
            downvotes: rng.random_range(0..=6),
            creator,
        });
    }
    out
}

// ------------------------------------------------------------------ apriori

/// Every unordered pair of distinct tags, counted across all transactions,
/// kept when `count / n >= min_support`. Sorted by count descending, then
/// by pair.
pub fn brute_pairs(transactions: &[BTreeSet<String>], min_support: f64) -> Vec<(String, String, usize)> {
    let n = transactions.len();
    let universe: BTreeSet<&String> = transactions.iter().flatten().collect();
    let universe: Vec<&String> = universe.into_iter().collect();
    let mut out = Vec::new();
    for i in 0..universe.len() {
        for j in i + 1..universe.len() {
            let (a, b) = (universe[i], universe[j]);
            let count = transactions.iter().filter(|t| t.contains(a) && t.contains(b)).count();
            if count > 0 && count as f64 / n as f64 >= min_support {
                out.push((a.clone(), b.clone(), count));
            }
        }
    }
    out.sort_by(|x, y| y.2.cmp(&x.2).then_with(|| (&x.0, &x.1).cmp(&(&y.0, &y.1))));
    out
}

pub fn random_transactions(rng: &mut ChaCha8Rng) -> (Vec<BTreeSet<String>>, f64) {
    let tags: Vec<String> = (0..rng.random_range(1..=12)).map(|i| format!("tag{i:02}")).collect();
    let n = rng.random_range(1..=500);
    let density = rng.random_range(0.05..0.7);
    let tx: Vec<BTreeSet<String>> =
        (0..n).map(|_| tags.iter().filter(|_| rng.random_bool(density)).cloned().collect()).collect();
    // half the time, a threshold that some pair hits exactly
    let min_support = if rng.random_bool(0.5) {
        f64::from(rng.random_range(1..=n as u32)) / n as f64
    } else {
        rng.random_range(0.001..=1.0)
    };
    (tx, min_support)
}

// -------------------------------------------------------------------- query

fn filter_holds(f: &Filter, value: &Object) -> bool {
    use std::cmp::Ordering;
    let ord: Option<Ordering> = match (&f.value, value) {
        (FilterValue::Integer(n), Object::Literal(l)) => match l.datatype() {
            Datatype::Integer | Datatype::Year => Some(l.lexical().parse::<i64>().unwrap().cmp(n)),
            Datatype::String => None,
        },
        (FilterValue::Literal(want), Object::Literal(l)) => {
            let numeric = |x: &Literal| x.datatype() != Datatype::String;
            if numeric(want) && numeric(l) {
                Some(l.lexical().parse::<i64>().unwrap().cmp(&want.lexical().parse::<i64>().unwrap()))
            } else if !numeric(want) && !numeric(l) {
                Some(l.lexical().cmp(want.lexical()))
            } else {
                None
            }
        }
        (FilterValue::Iri(want), Object::Iri(i)) => match f.op {
            Comparator::Eq | Comparator::Ne => Some(i.cmp(want)),
            _ => None,
        },
        _ => None,
    };
    match (ord, f.op) {
        (None, _) => false,
        (Some(o), Comparator::Eq) => o == Ordering::Equal,
        (Some(o), Comparator::Ne) => o != Ordering::Equal,
        (Some(o), Comparator::Lt) => o == Ordering::Less,
        (Some(o), Comparator::Le) => o != Ordering::Greater,
        (Some(o), Comparator::Gt) => o == Ordering::Greater,
        (Some(o), Comparator::Ge) => o != Ordering::Less,
    }
}

fn pattern_holds(p: &TriplePattern, assignment: &BTreeMap<&str, &Object>, graph: &Graph) -> bool {
    let value = |t: &PatternTerm| -> Object {
        match t {
            PatternTerm::Var(v) => assignment[v.as_str()].clone(),
            PatternTerm::Iri(i) => Object::Iri(i.clone()),
            PatternTerm::Literal(l) => Object::Literal(l.clone()),
        }
    };
    let (Object::Iri(s), Object::Iri(pr)) = (value(&p.subject), value(&p.predicate)) else {
        return false;
    };
    match &p.object {
        // integer constants also stand for the year of the same value
        PatternTerm::Literal(l) if l.datatype() == Datatype::Integer => graph.iter().any(|t| {
            t.subject == s
                && t.predicate == pr
                && matches!(&t.object, Object::Literal(o) if o.datatype() != Datatype::String
                    && o.lexical().parse::<i64>().ok() == l.lexical().parse::<i64>().ok())
        }),
        other => graph.contains(&Triple { subject: s, predicate: pr, object: value(other) }),
    }
}

/// Tries every assignment of graph terms to the query variables.
pub fn brute_query(ast: &QueryAst, graph: &Graph) -> Vec<Vec<Object>> {
    let mut domain: BTreeSet<Object> = BTreeSet::new();
    for t in graph.iter() {
        domain.insert(Object::Iri(t.subject.clone()));
        domain.insert(Object::Iri(t.predicate.clone()));
        domain.insert(t.object.clone());
    }
    let domain: Vec<Object> = domain.into_iter().collect();
    let mut vars: Vec<&str> = Vec::new();
    for p in &ast.patterns {
        for t in [&p.subject, &p.predicate, &p.object] {
            if let PatternTerm::Var(v) = t {
                if !vars.contains(&v.as_str()) {
                    vars.push(v);
                }
            }
        }
    }
    let mut rows = BTreeSet::new();
    if domain.is_empty() {
        return Vec::new();
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let assignment: BTreeMap<&str, &Object> = vars.iter().zip(&idx).map(|(v, i)| (*v, &domain[*i])).collect();
        if ast.patterns.iter().all(|p| pattern_holds(p, &assignment, graph))
            && ast.filters.iter().all(|f| filter_holds(f, assignment[f.var.as_str()]))
        {
            rows.insert(ast.select_vars.iter().map(|v| assignment[v.as_str()].clone()).collect::<Vec<_>>());
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return rows.into_iter().collect();
            }
            idx[k] += 1;
            if idx[k] < domain.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn entity(i: usize) -> Iri {
    ns(&format!("e{i}"))
}

fn predicate(i: usize) -> Iri {
    if i == 0 {
        rdf_type()
    } else {
        ns(&format!("p{i}"))
    }
}

fn random_object(rng: &mut ChaCha8Rng) -> Object {
    match rng.random_range(0..4) {
        0 | 1 => Object::Iri(entity(rng.random_range(0..6))),
        2 => Object::Literal(Literal::string(*["a", "b", "c"].choose(rng).unwrap())),
        _ if rng.random_bool(0.5) => Object::Literal(Literal::integer(rng.random_range(1..=3))),
        _ => Object::Literal(Literal::year(rng.random_range(1..=3))),
    }
}

/// Up to 200 triples over six entities, three predicates and a handful of
/// literals, so joins actually meet.
pub fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.random_range(0..=200);
    (0..n)
        .map(|_| Triple::new(entity(rng.random_range(0..6)), predicate(rng.random_range(0..3)), random_object(rng)))
        .collect()
}

/// One to three patterns over at most three variables, and at most one
/// filter. Always satisfies the parser's invariants.
pub fn random_query(rng: &mut ChaCha8Rng) -> QueryAst {
    let vars = ["x", "y", "z"];
    let var = |rng: &mut ChaCha8Rng| PatternTerm::Var(vars.choose(rng).unwrap().to_string());
    let mut patterns = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let subject = if rng.random_bool(0.7) { var(rng) } else { PatternTerm::Iri(entity(rng.random_range(0..6))) };
        let predicate =
            if rng.random_bool(0.25) { var(rng) } else { PatternTerm::Iri(predicate(rng.random_range(0..3))) };
        let object = if rng.random_bool(0.6) {
            var(rng)
        } else {
            match random_object(rng) {
                Object::Iri(i) => PatternTerm::Iri(i),
                Object::Literal(l) => PatternTerm::Literal(l),
            }
        };
        patterns.push(TriplePattern { subject, predicate, object });
    }
    if patterns.iter().all(|p| [&p.subject, &p.predicate, &p.object].iter().all(|t| t.var().is_none())) {
        patterns[0].subject = PatternTerm::Var("x".into());
    }
    let mut ast = QueryAst { select_vars: Vec::new(), patterns, filters: Vec::new() };
    let present: Vec<String> = ast.pattern_vars().into_iter().map(str::to_string).collect();
    for v in &present {
        if rng.random_bool(0.6) {
            ast.select_vars.push(v.clone());
        }
    }
    if ast.select_vars.is_empty() {
        ast.select_vars.push(present[0].clone());
    }
    if rng.random_bool(0.5) {
        let var = present.choose(rng).unwrap().clone();
        let op = *Comparator::ALL.choose(rng).unwrap();
        let value = match rng.random_range(0..4) {
            0 => FilterValue::Integer(rng.random_range(0..=4)),
            1 => FilterValue::Literal(Literal::string(*["a", "b", "bb"].choose(rng).unwrap())),
            2 => FilterValue::Literal(Literal::year(rng.random_range(1..=3))),
            _ => FilterValue::Iri(entity(rng.random_range(0..6))),
        };
        ast.filters.push(Filter { var, op, value });
        if ast.validate().is_err() {
            ast.filters.clear();
        }
    }
    ast
}

// --------------------------------------------------------------- recommend

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.iter().filter(|x| b.contains(*x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Scores every other record, sorts all of them, takes `k`.
pub fn brute_recommend(seed: &TrackRecord, corpus: &[TrackRecord], k: usize, w: [f64; 3]) -> Vec<(String, f64)> {
    let [wg, we, wi] = w;
    let mut all: Vec<(String, f64)> = corpus
        .iter()
        .filter(|r| r.europeana_id != seed.europeana_id)
        .map(|r| {
            let s = we * jaccard(&seed.emotions, &r.emotions)
                + wg * jaccard(&seed.genres, &r.genres)
                + wi * jaccard(&seed.instruments, &r.instruments);
            (r.europeana_id.clone(), s)
        })
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all.into_iter().take(k).collect()
}

pub fn random_tagged_record(rng: &mut ChaCha8Rng, vocab: &Vocabularies, id: String) -> TrackRecord {
    let mut r = TrackRecord::new(id);
    for category in Category::ALL {
        let terms: Vec<&str> = vocab.get(category).terms().iter().take(5).map(|t| t.id.as_str()).collect();
        for t in terms {
            if rng.random_bool(0.3) {
                r.tags_mut(category).insert(t.to_string());
            }
        }
    }
    r
}

// ----------------------------------------------------------- round trips

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const POOL: &[char] = &['a', 'b', 'Z', 'é', 'ß', ' ', ';', '\\', '"', ',', '\'', '\n', '#', '7', '–', '漢'];
    loop {
        let len = rng.random_range(1..=16);
        let s: String = (0..len).map(|_| *POOL.choose(rng).unwrap()).collect();
        let s = s.trim().to_string();
        if !s.is_empty() {
            return s;
        }
    }
}

fn random_date(rng: &mut ChaCha8Rng, year: i32) -> PartialDate {
    let s = match rng.random_range(0..3) {
        0 => format!("{year:04}"),
        1 => format!("{year:04}-{:02}", rng.random_range(1..=12)),
        _ => format!("{year:04}-{:02}-{:02}", rng.random_range(1..=12), rng.random_range(1..=28)),
    };
    s.parse().unwrap()
}

/// A valid record with awkward text in every free-text field.
pub fn random_record(rng: &mut ChaCha8Rng, vocab: &Vocabularies, index: usize) -> TrackRecord {
    let maybe = |rng: &mut ChaCha8Rng| rng.random_bool(0.8).then(|| random_text(rng));
    let mut r = TrackRecord::new(format!("/{}/{}", rng.random_range(1000..99999), index));
    r.title = maybe(rng);
    r.composer = maybe(rng);
    r.biography = maybe(rng);
    r.publisher = maybe(rng);
    r.place = maybe(rng);
    r.audio_url = rng.random_bool(0.5).then(|| format!("https://example.org/a/{index}.mp3"));
    r.year = rng.random_bool(0.8).then(|| rng.random_range(1000..=2030));
    r.duration_ms = rng.random_bool(0.8).then(|| rng.random_range(0..=2_000_000));
    if rng.random_bool(0.7) {
        let born = rng.random_range(1600..=1990);
        r.composer_birth = Some(random_date(rng, born));
        if rng.random_bool(0.7) {
            let died = born + rng.random_range(1..=90);
            r.composer_death = Some(random_date(rng, died));
        }
    }
    for category in Category::ALL {
        for t in vocab.get(category).terms() {
            if rng.random_bool(0.15) {
                r.tags_mut(category).insert(t.id.clone());
            }
        }
    }
    r.comments = (0..rng.random_range(0..4)).map(|_| random_text(rng)).collect();
    r
}
