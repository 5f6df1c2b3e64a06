//! Line-oriented text formats: Min-Mon-SAT formulas and DIMACS-style graphs.
//!
//! ```text
//! c comment lines start with 'c'
//! mms 3 2 1
//! 1 2 0
//! 2 3 0
//! ```
//!
//! Graphs use `p edge <n> <m>` followed by `e <u> <v>` lines.

use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::reduction::{Formula, Graph, MmsInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextErrorKind {
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("missing header line")]
    MissingHeader,
    #[error("malformed header, expected `{expected}`")]
    BadHeader { expected: &'static str },
    #[error("`{token}` is not an integer")]
    InvalidToken { token: String },
    #[error("negative literal {literal}: formulas must be monotone")]
    MonotonicityViolation { literal: i64 },
    #[error("variable {var} is outside 1..={n}")]
    RangeError { var: i64, n: u32 },
    #[error("empty clause")]
    EmptyClause,
    #[error("clause is not terminated by 0")]
    UnterminatedClause,
    #[error("unexpected `{token}` after the terminating 0")]
    TrailingToken { token: String },
    #[error("header declares {declared} entries but {found} follow")]
    CountMismatch { declared: usize, found: usize },
    #[error("k = {k} exceeds the variable count {n}")]
    KTooLarge { k: u32, n: u32 },
    #[error("at least one variable is required")]
    NoVariables,
    #[error("expected a line starting with `{expected}`")]
    UnexpectedLine { expected: &'static str },
    #[error("self-loop on vertex {v}")]
    SelfLoop { v: u32 },
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: u32, v: u32 },
}

impl TextErrorKind {
    /// Stable variant name, used as the error code in API replies.
    pub fn name(&self) -> &'static str {
        match self {
            TextErrorKind::InvalidUtf8 => "InvalidUtf8",
            TextErrorKind::MissingHeader => "MissingHeader",
            TextErrorKind::BadHeader { .. } => "BadHeader",
            TextErrorKind::InvalidToken { .. } => "InvalidToken",
            TextErrorKind::MonotonicityViolation { .. } => "MonotonicityViolation",
            TextErrorKind::RangeError { .. } => "RangeError",
            TextErrorKind::EmptyClause => "EmptyClause",
            TextErrorKind::UnterminatedClause => "UnterminatedClause",
            TextErrorKind::TrailingToken { .. } => "TrailingToken",
            TextErrorKind::CountMismatch { .. } => "CountMismatch",
            TextErrorKind::KTooLarge { .. } => "KTooLarge",
            TextErrorKind::NoVariables => "NoVariables",
            TextErrorKind::UnexpectedLine { .. } => "UnexpectedLine",
            TextErrorKind::SelfLoop { .. } => "SelfLoop",
            TextErrorKind::DuplicateEdge { .. } => "DuplicateEdge",
        }
    }
}

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextError {
    pub line: usize,
    pub column: usize,
    pub kind: TextErrorKind,
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.kind)
    }
}

impl std::error::Error for TextError {}

fn err(line: usize, column: usize, kind: TextErrorKind) -> TextError {
    TextError { line, column, kind }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

impl Token<'_> {
    fn fail(&self, kind: TextErrorKind) -> TextError {
        err(self.line, self.column, kind)
    }

    fn int(&self) -> Result<i64, TextError> {
        self.text.parse().map_err(|_| {
            self.fail(TextErrorKind::InvalidToken {
                token: self.text.to_string(),
            })
        })
    }

    fn count(&self) -> Result<u32, TextError> {
        let v = self.int()?;
        u32::try_from(v).map_err(|_| {
            self.fail(TextErrorKind::InvalidToken {
                token: self.text.to_string(),
            })
        })
    }
}

struct Line<'a> {
    number: usize,
    len: usize,
    tokens: Vec<Token<'a>>,
}

impl Line<'_> {
    fn end(&self) -> (usize, usize) {
        (self.number, self.len + 1)
    }
}

/// Non-blank, non-comment lines split into whitespace-separated tokens.
fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let mut tokens = Vec::new();
        let mut start: Option<(usize, usize)> = None;
        let mut col = 0;
        for (byte, ch) in raw.char_indices() {
            col += 1;
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some((byte, col)),
                (true, Some((b, c))) => {
                    tokens.push(Token {
                        line: i + 1,
                        column: c,
                        text: &raw[b..byte],
                    });
                    start = None;
                }
                _ => {}
            }
        }
        if let Some((b, c)) = start {
            tokens.push(Token {
                line: i + 1,
                column: c,
                text: &raw[b..],
            });
        }
        let comment = tokens.first().is_some_and(|t| t.text == "c" || t.text.starts_with('#'));
        if !tokens.is_empty() && !comment {
            out.push(Line {
                number: i + 1,
                len: col,
                tokens,
            });
        }
    }
    out
}

fn decode(bytes: &[u8]) -> Result<&str, TextError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let ok = &bytes[..e.valid_up_to()];
        let line = ok.iter().filter(|&&b| b == b'\n').count() + 1;
        let tail = ok.rsplit(|&b| b == b'\n').next().unwrap_or(ok);
        let column = String::from_utf8_lossy(tail).chars().count() + 1;
        err(line, column, TextErrorKind::InvalidUtf8)
    })
}

/// Header tokens after the keyword, checked for the exact arity.
fn header<'a>(
    ls: &[Line<'a>],
    keyword: &[&str],
    arity: usize,
    expected: &'static str,
) -> Result<Vec<Token<'a>>, TextError> {
    let Some(first) = ls.first() else {
        return Err(err(1, 1, TextErrorKind::MissingHeader));
    };
    let t = &first.tokens;
    let bad = || first.tokens[0].fail(TextErrorKind::BadHeader { expected });
    if t.len() < keyword.len() || t.iter().zip(keyword).any(|(a, b)| a.text != *b) {
        return Err(bad());
    }
    let rest = t[keyword.len()..].to_vec();
    if rest.len() != arity {
        let (l, c) = rest.get(arity).map(|t| (t.line, t.column)).unwrap_or(first.end());
        return Err(err(l, c, TextErrorKind::BadHeader { expected }));
    }
    Ok(rest)
}

pub fn parse_formula_bytes(bytes: &[u8]) -> Result<MmsInstance, TextError> {
    parse_formula(decode(bytes)?)
}

/// Parses `mms <n> <m> <k>` followed by one 0-terminated clause per line.
pub fn parse_formula(text: &str) -> Result<MmsInstance, TextError> {
    let ls = lines(text);
    let h = header(&ls, &["mms"], 3, "mms <n> <m> <k>")?;
    let n = h[0].count()?;
    let m = h[1].count()? as usize;
    let k = h[2].count()?;
    if n == 0 {
        return Err(h[0].fail(TextErrorKind::NoVariables));
    }
    if k > n {
        return Err(h[2].fail(TextErrorKind::KTooLarge { k, n }));
    }
    let mut clauses = Vec::new();
    for line in &ls[1..] {
        let mut clause = Vec::new();
        let mut closed = false;
        for tok in &line.tokens {
            if closed {
                return Err(tok.fail(TextErrorKind::TrailingToken {
                    token: tok.text.to_string(),
                }));
            }
            let v = tok.int()?;
            if v < 0 {
                return Err(tok.fail(TextErrorKind::MonotonicityViolation { literal: v }));
            }
            if v == 0 {
                if clause.is_empty() {
                    return Err(tok.fail(TextErrorKind::EmptyClause));
                }
                closed = true;
                continue;
            }
            if v > n as i64 {
                return Err(tok.fail(TextErrorKind::RangeError { var: v, n }));
            }
            clause.push(v as u32);
        }
        if !closed {
            let (l, c) = line.end();
            return Err(err(l, c, TextErrorKind::UnterminatedClause));
        }
        clauses.push(clause);
    }
    if clauses.len() != m {
        return Err(h[1].fail(TextErrorKind::CountMismatch {
            declared: m,
            found: clauses.len(),
        }));
    }
    let formula = Formula::new(n, clauses).expect("clauses validated while parsing");
    Ok(MmsInstance::new(formula, k).expect("k validated while parsing"))
}

pub fn write_formula(inst: &MmsInstance) -> String {
    let f = &inst.formula;
    let mut s = format!("mms {} {} {}\n", f.num_vars(), f.num_clauses(), inst.k);
    for c in f.clauses() {
        s.push_str(&c.iter().map(|v| v.to_string()).chain(["0".to_string()]).join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_graph_bytes(bytes: &[u8]) -> Result<Graph, TextError> {
    parse_graph(decode(bytes)?)
}

/// Parses `p edge <n> <m>` followed by `e <u> <v>` lines; vertices are 1-based.
pub fn parse_graph(text: &str) -> Result<Graph, TextError> {
    let ls = lines(text);
    let h = header(&ls, &["p", "edge"], 2, "p edge <n> <m>")?;
    let n = h[0].count()?;
    let m = h[1].count()? as usize;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for line in &ls[1..] {
        let t = &line.tokens;
        if t[0].text != "e" {
            return Err(t[0].fail(TextErrorKind::UnexpectedLine { expected: "e" }));
        }
        if t.len() != 3 {
            let (l, c) = t.get(3).map(|t| (t.line, t.column)).unwrap_or(line.end());
            return Err(err(l, c, TextErrorKind::UnexpectedLine { expected: "e <u> <v>" }));
        }
        let mut ends = [0u32; 2];
        for (slot, tok) in ends.iter_mut().zip(&t[1..]) {
            let v = tok.int()?;
            if v < 1 || v > n as i64 {
                return Err(tok.fail(TextErrorKind::RangeError { var: v, n }));
            }
            *slot = v as u32;
        }
        let [u, v] = ends;
        if u == v {
            return Err(t[1].fail(TextErrorKind::SelfLoop { v }));
        }
        if edges.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
            return Err(t[0].fail(TextErrorKind::DuplicateEdge { u, v }));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(h[1].fail(TextErrorKind::CountMismatch {
            declared: m,
            found: edges.len(),
        }));
    }
    Ok(Graph::new(n, edges))
}

pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("p edge {} {}\n", g.n, g.edges.len());
    for (u, v) in &g.edges {
        s.push_str(&format!("e {u} {v}\n"));
    }
    s
}
