use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{PatternTerm, QueryAst, TriplePattern};
use crate::graph::{Graph, Iri, Object, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BindingTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Object>>,
}

impl BindingTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of one column, in row order.
    pub fn column(&self, var: &str) -> Option<Vec<&Object>> {
        let i = self.header.iter().position(|h| h == var)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Tab-separated text with a `?var` header. IRIs are shortened with
    /// `prefixes` when one applies.
    pub fn to_tsv(&self, prefixes: &BTreeMap<String, String>) -> String {
        let cell = |o: &Object| match o {
            Object::Iri(i) => prefixes
                .iter()
                .filter(|(_, ns)| i.as_str().starts_with(ns.as_str()) && i.as_str().len() > ns.len())
                .max_by_key(|(_, ns)| ns.len())
                .map_or_else(|| format!("<{i}>"), |(p, ns)| format!("{p}:{}", &i.as_str()[ns.len()..])),
            Object::Literal(l) => l.lexical().replace(['\t', '\n', '\r'], " "),
        };
        let mut out = self.header.iter().map(|h| format!("?{h}")).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(cell).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for BindingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tsv(&BTreeMap::new()))
    }
}

type Row = Vec<Option<Object>>;

/// Whether a pattern constant matches a graph object. Integer constants
/// also match year literals of the same value.
pub(super) fn constant_matches(constant: &Object, value: &Object) -> bool {
    match (constant, value) {
        (Object::Literal(c), Object::Literal(v)) if c.datatype() == crate::graph::Datatype::Integer => {
            c.numeric_value() == v.numeric_value()
        }
        _ => constant == value,
    }
}

fn const_iri(term: &PatternTerm, row: &Row, slots: &BTreeMap<&str, usize>) -> Result<Option<Iri>, ()> {
    match term {
        PatternTerm::Iri(i) => Ok(Some(i.clone())),
        PatternTerm::Literal(_) => Err(()),
        PatternTerm::Var(v) => match &row[slots[v.as_str()]] {
            None => Ok(None),
            Some(Object::Iri(i)) => Ok(Some(i.clone())),
            Some(Object::Literal(_)) => Err(()),
        },
    }
}

fn bound_object(term: &PatternTerm, row: &Row, slots: &BTreeMap<&str, usize>) -> Option<Object> {
    match term {
        PatternTerm::Iri(i) => Some(Object::Iri(i.clone())),
        PatternTerm::Literal(l) => Some(Object::Literal(l.clone())),
        PatternTerm::Var(v) => row[slots[v.as_str()]].clone(),
    }
}

/// Extends `row` with every match of `pattern`.
fn extend(graph: &Graph, pattern: &TriplePattern, row: &Row, slots: &BTreeMap<&str, usize>, out: &mut Vec<Row>) {
    let (Ok(s), Ok(p)) = (const_iri(&pattern.subject, row, slots), const_iri(&pattern.predicate, row, slots)) else {
        return;
    };
    let o = bound_object(&pattern.object, row, slots);
    // integer constants must also see year literals, so they are not used
    // as an index key
    let loose = matches!(&pattern.object, PatternTerm::Literal(l) if l.numeric_value().is_some() && l.datatype() == crate::graph::Datatype::Integer);
    let key = if loose { None } else { o.as_ref() };
    for t in graph.matching(s.as_ref(), p.as_ref(), key) {
        if let Some(o) = &o {
            if !constant_matches(o, &t.object) {
                continue;
            }
        }
        if let Some(next) = bind(pattern, t, row, slots) {
            out.push(next);
        }
    }
}

fn bind(pattern: &TriplePattern, t: &Triple, row: &Row, slots: &BTreeMap<&str, usize>) -> Option<Row> {
    let mut next = row.clone();
    let values = [Object::Iri(t.subject.clone()), Object::Iri(t.predicate.clone()), t.object.clone()];
    for (term, value) in pattern.terms().into_iter().zip(values) {
        if let PatternTerm::Var(v) = term {
            let slot = &mut next[slots[v.as_str()]];
            match slot {
                Some(existing) if *existing != value => return None,
                Some(_) => {}
                None => *slot = Some(value),
            }
        }
    }
    Some(next)
}

/// Number of positions a pattern fixes given the variables bound so far.
fn boundness(pattern: &TriplePattern, bound: &BTreeSet<&str>) -> usize {
    pattern.terms().iter().filter(|t| t.var().is_none_or(|v| bound.contains(v))).count()
}

/// Evaluates by nested index joins, choosing the most constrained pattern
/// at each step. Rows are deduplicated and sorted.
pub fn evaluate_query(ast: &QueryAst, graph: &Graph) -> BindingTable {
    let vars = ast.pattern_vars();
    let slots: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let mut remaining: Vec<&TriplePattern> = ast.patterns.iter().collect();
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    let mut rows: Vec<Row> = vec![vec![None; vars.len()]];
    while !remaining.is_empty() && !rows.is_empty() {
        let best =
            (0..remaining.len()).max_by_key(|&i| (boundness(remaining[i], &bound), std::cmp::Reverse(i))).unwrap_or(0);
        let pattern = remaining.remove(best);
        let mut next = Vec::new();
        for row in &rows {
            extend(graph, pattern, row, &slots, &mut next);
        }
        bound.extend(pattern.terms().iter().filter_map(|t| t.var()));
        rows = next;
    }

    let projected: BTreeSet<Vec<Object>> = rows
        .into_iter()
        .filter(|row| {
            ast.filters.iter().all(|f| row[slots[f.var.as_str()]].as_ref().is_some_and(|v| f.value.compare(f.op, v)))
        })
        .map(|row| {
            ast.select_vars
                .iter()
                .map(|v| row[slots[v.as_str()]].clone().expect("every pattern variable is bound after the join"))
                .collect()
        })
        .collect();
    BindingTable { header: ast.select_vars.clone(), rows: projected.into_iter().collect() }
}
