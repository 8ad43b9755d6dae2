//! Line-based triple serialization. One `<s> <p> <o> .` statement per line;
//! literals are `"text"` or `"text"^^<datatype>`.

use std::path::Path;

use super::{Datatype, Graph, GraphError, Iri, Literal, Object, Triple};

pub(super) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub(super) fn format_literal(l: &Literal) -> String {
    match l.datatype() {
        Datatype::String => format!("\"{}\"", escape(l.lexical())),
        dt => format!("\"{}\"^^<{}>", escape(l.lexical()), dt.iri()),
    }
}

fn format_triple(t: &Triple) -> String {
    format!("<{}> <{}> {} .", t.subject, t.predicate, t.object)
}

/// Canonical text: one line per triple in sorted order, so equal graphs
/// serialize byte-identically.
pub fn serialize_graph(graph: &Graph) -> String {
    let mut out = String::new();
    for t in graph.iter() {
        out.push_str(&format_triple(t));
        out.push('\n');
    }
    out
}

pub fn write_graph(graph: &Graph, path: &Path) -> Result<(), GraphError> {
    std::fs::write(path, serialize_graph(graph))
        .map_err(|e| GraphError::WriteFailure(format!("{}: {e}", path.display())))
}

struct Cursor<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> GraphError {
        GraphError::SyntaxError { line: self.line, message: message.into() }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn iri(&mut self) -> Result<Iri, GraphError> {
        self.skip_ws();
        let body = self.rest.strip_prefix('<').ok_or_else(|| self.error("expected '<'"))?;
        let end = body.find('>').ok_or_else(|| self.error("unterminated IRI"))?;
        let iri = Iri::new(&body[..end]).map_err(|e| self.error(e.to_string()))?;
        self.rest = &body[end + 1..];
        Ok(iri)
    }

    fn literal(&mut self) -> Result<Literal, GraphError> {
        let mut chars = self.rest[1..].char_indices();
        let mut lexical = String::new();
        let end = loop {
            match chars.next() {
                None => return Err(self.error("unterminated literal")),
                Some((i, '"')) => break i + 2,
                Some((_, '\\')) => match chars.next() {
                    Some((_, '\\')) => lexical.push('\\'),
                    Some((_, '"')) => lexical.push('"'),
                    Some((_, 'n')) => lexical.push('\n'),
                    Some((_, 'r')) => lexical.push('\r'),
                    Some((_, 't')) => lexical.push('\t'),
                    Some((_, c)) => return Err(self.error(format!("unknown escape '\\{c}'"))),
                    None => return Err(self.error("unterminated literal")),
                },
                Some((_, c)) => lexical.push(c),
            }
        };
        self.rest = &self.rest[end..];
        let Some(after) = self.rest.strip_prefix("^^") else {
            return Ok(Literal::string(lexical));
        };
        self.rest = after;
        let dt = self.iri()?;
        let datatype = [Datatype::String, Datatype::Integer, Datatype::Year]
            .into_iter()
            .find(|d| d.iri() == dt.as_str())
            .ok_or_else(|| self.error(format!("unsupported datatype <{dt}>")))?;
        Literal::new(lexical, datatype).map_err(|e| self.error(e.to_string()))
    }

    fn object(&mut self) -> Result<Object, GraphError> {
        self.skip_ws();
        if self.rest.starts_with('"') {
            self.literal().map(Object::Literal)
        } else {
            self.iri().map(Object::Iri)
        }
    }
}

fn parse_line(text: &str, line: usize) -> Result<Triple, GraphError> {
    let mut c = Cursor { rest: text, line };
    let subject = c.iri()?;
    let predicate = c.iri()?;
    let object = c.object()?;
    c.skip_ws();
    let rest = c.rest.strip_prefix('.').ok_or_else(|| c.error("expected '.'"))?;
    if !rest.trim().is_empty() {
        return Err(c.error(format!("unexpected trailing text '{}'", rest.trim())));
    }
    Ok(Triple { subject, predicate, object })
}

/// Parses serialized triples. Blank lines and `#` comment lines are skipped.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut graph = Graph::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        graph.insert(parse_line(trimmed, i + 1)?);
    }
    Ok(graph)
}

pub fn read_graph(path: &Path) -> Result<Graph, GraphError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| GraphError::ReadFailure(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}
