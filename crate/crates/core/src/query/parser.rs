use std::collections::BTreeMap;

use super::{Comparator, Filter, FilterValue, PatternTerm, QueryAst, QueryError, TriplePattern};
use crate::graph::{default_prefixes, rdf_type, Datatype, Iri, Literal};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    Iri(String),
    Str(String),
    Int(i64),
    TypeTag,
    LBrace,
    RBrace,
    Dot,
    Op(Comparator),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> QueryError {
    QueryError::SyntaxError { line, col, message: message.into() }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.' | '%')
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self, n: usize) {
        for _ in 0..n {
            if self.chars[self.i] == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
            self.i += 1;
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let from = self.i;
        while self.peek_at(0).is_some_and(&f) {
            self.bump(1);
        }
        self.chars[from..self.i].iter().collect()
    }

    fn string(&mut self, line: usize, col: usize) -> Result<String, QueryError> {
        self.bump(1);
        let mut s = String::new();
        loop {
            let c = self.peek_at(0).ok_or_else(|| syntax(line, col, "unterminated string"))?;
            self.bump(1);
            match c {
                '"' => return Ok(s),
                '\\' => {
                    let e = self.peek_at(0).ok_or_else(|| syntax(line, col, "unterminated string"))?;
                    s.push(match e {
                        'n' => '\n',
                        'r' => '\r',
                        't' => '\t',
                        '"' | '\\' => e,
                        _ => return Err(syntax(self.line, self.col, format!("unknown escape '\\{e}'"))),
                    });
                    self.bump(1);
                }
                c => s.push(c),
            }
        }
    }

    fn token(&mut self) -> Result<Option<Spanned>, QueryError> {
        loop {
            match self.peek_at(0) {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => self.bump(1),
                Some('#') => {
                    self.take_while(|c| c != '\n');
                }
                Some(_) => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let c = self.chars[self.i];
        let next = self.peek_at(1);
        let single = |tok: Tok| (tok, 1);
        let (tok, width) = match (c, next) {
            ('{', _) => single(Tok::LBrace),
            ('}', _) => single(Tok::RBrace),
            ('.', _) => single(Tok::Dot),
            ('=', _) => single(Tok::Op(Comparator::Eq)),
            ('≠', _) => single(Tok::Op(Comparator::Ne)),
            ('≤', _) => single(Tok::Op(Comparator::Le)),
            ('≥', _) => single(Tok::Op(Comparator::Ge)),
            ('!', Some('=')) => (Tok::Op(Comparator::Ne), 2),
            ('>', Some('=')) => (Tok::Op(Comparator::Ge), 2),
            ('>', _) => single(Tok::Op(Comparator::Gt)),
            ('^', Some('^')) => (Tok::TypeTag, 2),
            ('<', _) => {
                // `<` opens an IRI only when a `>` follows with no whitespace
                // in between; otherwise it is a comparator.
                let rest = &self.chars[self.i + 1..];
                match rest.iter().position(|&c| c == '>' || c.is_whitespace()) {
                    Some(k) if k > 0 && rest[k] == '>' => (Tok::Iri(rest[..k].iter().collect()), k + 2),
                    _ if next == Some('=') => (Tok::Op(Comparator::Le), 2),
                    _ => single(Tok::Op(Comparator::Lt)),
                }
            }
            ('"', _) => {
                let s = self.string(line, col)?;
                return Ok(Some(Spanned { tok: Tok::Str(s), line, col }));
            }
            ('?', _) => {
                self.bump(1);
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(syntax(line, col, "expected a variable name after '?'"));
                }
                return Ok(Some(Spanned { tok: Tok::Var(name), line, col }));
            }
            (c, n) if c.is_ascii_digit() || (c == '-' && n.is_some_and(|n| n.is_ascii_digit())) => {
                self.bump(1);
                let digits = self.take_while(|c| c.is_ascii_digit());
                let s = format!("{c}{digits}");
                let n = s.parse().map_err(|_| syntax(line, col, format!("integer '{s}' out of range")))?;
                return Ok(Some(Spanned { tok: Tok::Int(n), line, col }));
            }
            (c, _) if c.is_alphabetic() || c == '_' || c == ':' => {
                let from = self.i;
                let mut end = from;
                while self.chars.get(end).is_some_and(|&c| is_name_char(c)) {
                    end += 1;
                }
                // a trailing '.' ends the pattern, not the name
                while self.chars[end - 1] == '.' {
                    end -= 1;
                }
                (Tok::Word(self.chars[from..end].iter().collect()), end - from)
            }
            (c, _) => return Err(syntax(line, col, format!("unexpected character '{c}'"))),
        };
        self.bump(width);
        Ok(Some(Spanned { tok, line, col }))
    }
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let mut lexer = Lexer { chars: text.chars().collect(), i: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(t) = lexer.token()? {
        out.push(t);
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.col))
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        let (line, col) = self.here();
        syntax(line, col, message)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{kw}'")))
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), QueryError> {
        if self.peek().map(|t| &t.tok) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn iri(&self, text: &str, line: usize, col: usize) -> Result<Iri, QueryError> {
        Iri::new(text).map_err(|e| syntax(line, col, e.to_string()))
    }

    fn prefixed(&self, word: &str, line: usize, col: usize) -> Result<Iri, QueryError> {
        if word == "a" || word.eq_ignore_ascii_case("type") {
            return Ok(rdf_type());
        }
        let (prefix, local) = word.split_once(':').unwrap_or(("", word));
        let ns = self.prefixes.get(prefix).ok_or_else(|| QueryError::UnknownPrefix {
            prefix: prefix.to_string(),
            line,
            col,
        })?;
        self.iri(&format!("{ns}{local}"), line, col)
    }

    fn prefix_decl(&mut self) -> Result<(), QueryError> {
        self.pos += 1;
        let Some(Spanned { tok: Tok::Word(name), line, col }) = self.next() else {
            self.pos -= 1;
            return Err(self.error("expected 'name:' after prefix"));
        };
        let Some(name) = name.strip_suffix(':').filter(|n| !n.contains(':')) else {
            return Err(syntax(line, col, "prefix name must end with ':'"));
        };
        match self.next() {
            Some(Spanned { tok: Tok::Iri(ns), line, col }) => {
                self.iri(&ns, line, col)?;
                self.prefixes.insert(name.to_string(), ns);
                Ok(())
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected <namespace> after prefix name"))
            }
        }
    }

    /// A literal body followed by an optional `^^datatype`.
    fn typed_literal(&mut self, lexical: String, line: usize, col: usize) -> Result<Literal, QueryError> {
        if self.peek().map(|t| &t.tok) != Some(&Tok::TypeTag) {
            return Ok(Literal::string(lexical));
        }
        self.pos += 1;
        let dt = match self.next() {
            Some(Spanned { tok: Tok::Iri(i), line, col }) => self.iri(&i, line, col)?,
            Some(Spanned { tok: Tok::Word(w), line, col }) => self.prefixed(&w, line, col)?,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected a datatype after '^^'"));
            }
        };
        let datatype = [Datatype::String, Datatype::Integer, Datatype::Year]
            .into_iter()
            .find(|d| d.iri() == dt.as_str())
            .ok_or_else(|| syntax(line, col, format!("unsupported datatype <{dt}>")))?;
        Literal::new(lexical, datatype).map_err(|e| syntax(line, col, e.to_string()))
    }

    fn term(&mut self) -> Result<PatternTerm, QueryError> {
        let Some(Spanned { tok, line, col }) = self.next() else {
            return Err(self.error("unexpected end of query, expected a term"));
        };
        match tok {
            Tok::Var(v) => Ok(PatternTerm::Var(v)),
            Tok::Iri(i) => Ok(PatternTerm::Iri(self.iri(&i, line, col)?)),
            Tok::Word(w) => Ok(PatternTerm::Iri(self.prefixed(&w, line, col)?)),
            Tok::Str(s) => Ok(PatternTerm::Literal(self.typed_literal(s, line, col)?)),
            Tok::Int(n) => Ok(PatternTerm::Literal(Literal::integer(n))),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a variable, IRI, name or literal"))
            }
        }
    }

    fn filter(&mut self) -> Result<Filter, QueryError> {
        self.pos += 1;
        let var = match self.next() {
            Some(Spanned { tok: Tok::Var(v), .. }) => v,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected a variable after 'filter'"));
            }
        };
        let op = match self.next() {
            Some(Spanned { tok: Tok::Op(op), .. }) => op,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected a comparator (=, !=, <, <=, >, >=)"));
            }
        };
        let value = match self.next() {
            Some(Spanned { tok: Tok::Int(n), .. }) => FilterValue::Integer(n),
            Some(Spanned { tok: Tok::Str(s), line, col }) => FilterValue::Literal(self.typed_literal(s, line, col)?),
            Some(Spanned { tok: Tok::Iri(i), line, col }) => FilterValue::Iri(self.iri(&i, line, col)?),
            Some(Spanned { tok: Tok::Word(w), line, col }) => FilterValue::Iri(self.prefixed(&w, line, col)?),
            _ => {
                self.pos -= 1;
                return Err(self.error("expected a value to compare against"));
            }
        };
        Ok(Filter { var, op, value })
    }

    fn query(&mut self) -> Result<QueryAst, QueryError> {
        while self.keyword("prefix") {
            self.prefix_decl()?;
        }
        self.expect_keyword("select")?;
        let mut select_vars = Vec::new();
        while let Some(Spanned { tok: Tok::Var(v), .. }) = self.peek() {
            if !select_vars.contains(v) {
                select_vars.push(v.clone());
            }
            self.pos += 1;
        }
        if select_vars.is_empty() {
            return Err(self.error("expected at least one ?variable after 'select'"));
        }
        self.expect_keyword("where")?;
        self.expect(Tok::LBrace, "'{'")?;
        let mut patterns = Vec::new();
        loop {
            if self.peek().map(|t| &t.tok) == Some(&Tok::RBrace) {
                self.pos += 1;
                break;
            }
            let subject = self.term()?;
            let predicate = self.term()?;
            if matches!(predicate, PatternTerm::Literal(_)) {
                self.pos -= 1;
                return Err(self.error("a literal cannot be a predicate"));
            }
            let object = self.term()?;
            if matches!(subject, PatternTerm::Literal(_)) {
                self.pos -= 3;
                return Err(self.error("a literal cannot be a subject"));
            }
            patterns.push(TriplePattern { subject, predicate, object });
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Dot) => self.pos += 1,
                Some(Tok::RBrace) => {}
                _ => return Err(self.error("expected '.' or '}' after a pattern")),
            }
        }
        if patterns.is_empty() {
            self.pos -= 1;
            return Err(self.error("at least one pattern is required"));
        }
        let mut filters = Vec::new();
        while self.keyword("filter") {
            filters.push(self.filter()?);
        }
        if self.peek().is_some() {
            return Err(self.error("unexpected trailing input"));
        }
        let ast = QueryAst { select_vars, patterns, filters };
        ast.validate()?;
        Ok(ast)
    }
}

/// Parses against the default prefix map.
pub fn parse_query(text: &str) -> Result<QueryAst, QueryError> {
    parse_query_with_prefixes(text, &default_prefixes())
}

/// Parses with `prefixes` (for instance a graph's prefix map) in scope.
/// `prefix` declarations in the text extend or override it.
pub fn parse_query_with_prefixes(text: &str, prefixes: &BTreeMap<String, String>) -> Result<QueryAst, QueryError> {
    let toks = tokenize(text)?;
    let lines = text.split('\n').count();
    let last_col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    let mut p = Parser { toks, pos: 0, prefixes: prefixes.clone(), end: (lines, last_col) };
    p.query()
}
