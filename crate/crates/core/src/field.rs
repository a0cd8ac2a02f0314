//! Field expressions: attributes, aggregations over them, and complex
//! fields combining two sub-expressions.
//!
//! Every expression has one canonical rendering, for example `place`,
//! `AVG(magnitude)` or `(latitude×longitude)`. The rendering adds no
//! whitespace of its own; attribute names are emitted verbatim, so
//! `SUM(number of records)` is a valid rendering. Equality, hashing and
//! ordering all follow the rendering.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseFieldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggOp {
    Sum,
    Min,
    Max,
    Avg,
}

impl AggOp {
    pub const ALL: [AggOp; 4] = [AggOp::Sum, AggOp::Min, AggOp::Max, AggOp::Avg];

    pub fn keyword(self) -> &'static str {
        match self {
            AggOp::Sum => "SUM",
            AggOp::Min => "MIN",
            AggOp::Max => "MAX",
            AggOp::Avg => "AVG",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "SUM" => Some(AggOp::Sum),
            "MIN" => Some(AggOp::Min),
            "MAX" => Some(AggOp::Max),
            "AVG" => Some(AggOp::Avg),
            _ => None,
        }
    }
}

/// Binary operator of a complex field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexOp {
    /// `+`
    Concat,
    /// `×`
    Cross,
    /// `/`
    Nest,
}

impl ComplexOp {
    pub fn symbol(self) -> char {
        match self {
            ComplexOp::Concat => '+',
            ComplexOp::Cross => '×',
            ComplexOp::Nest => '/',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(ComplexOp::Concat),
            // `*` is accepted as an ASCII spelling of the cross operator.
            '×' | '*' => Some(ComplexOp::Cross),
            '/' => Some(ComplexOp::Nest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum FieldExpr {
    Simple(String),
    Aggregated(AggOp, Box<FieldExpr>),
    Complex(ComplexOp, Box<FieldExpr>, Box<FieldExpr>),
}

impl FieldExpr {
    pub fn simple(name: impl Into<String>) -> Self {
        FieldExpr::Simple(name.into())
    }

    pub fn agg(op: AggOp, inner: FieldExpr) -> Self {
        FieldExpr::Aggregated(op, Box::new(inner))
    }

    pub fn complex(op: ComplexOp, left: FieldExpr, right: FieldExpr) -> Self {
        FieldExpr::Complex(op, Box::new(left), Box::new(right))
    }

    /// Parse a canonical (or loosely spaced) rendering.
    pub fn parse(s: &str) -> Result<Self, ParseFieldError> {
        let mut parser = Parser { src: s, pos: 0 };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.error("trailing input"));
        }
        Ok(expr)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            FieldExpr::Simple(name) => out.push_str(name),
            FieldExpr::Aggregated(op, inner) => {
                out.push_str(op.keyword());
                out.push('(');
                inner.render_into(out);
                out.push(')');
            }
            FieldExpr::Complex(op, l, r) => {
                out.push('(');
                l.render_into(out);
                out.push(op.symbol());
                r.render_into(out);
                out.push(')');
            }
        }
    }

    /// True when an aggregation operator occurs anywhere in the expression.
    pub fn is_aggregated(&self) -> bool {
        match self {
            FieldExpr::Simple(_) => false,
            FieldExpr::Aggregated(..) => true,
            FieldExpr::Complex(_, l, r) => l.is_aggregated() || r.is_aggregated(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, FieldExpr::Complex(..))
    }

    /// Attribute names referenced, left to right, with repeats.
    pub fn attributes(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_attributes(&mut out);
        out
    }

    fn collect_attributes<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            FieldExpr::Simple(name) => out.push(name),
            FieldExpr::Aggregated(_, inner) => inner.collect_attributes(out),
            FieldExpr::Complex(_, l, r) => {
                l.collect_attributes(out);
                r.collect_attributes(out);
            }
        }
    }

    /// Number of complex operator nodes.
    pub fn operator_count(&self) -> usize {
        match self {
            FieldExpr::Simple(_) => 0,
            FieldExpr::Aggregated(_, inner) => inner.operator_count(),
            FieldExpr::Complex(_, l, r) => 1 + l.operator_count() + r.operator_count(),
        }
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for FieldExpr {
    type Err = ParseFieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FieldExpr::parse(s)
    }
}

/// Rendering split into borrowed fragments, for the common shapes that
/// need no allocation.
enum Pieces<'a> {
    Borrowed([&'a str; 4], usize),
    Owned(String),
}

impl FieldExpr {
    fn pieces(&self) -> Pieces<'_> {
        match self {
            FieldExpr::Simple(name) => Pieces::Borrowed([name, "", "", ""], 1),
            FieldExpr::Aggregated(op, inner) => match inner.as_ref() {
                FieldExpr::Simple(name) => Pieces::Borrowed([op.keyword(), "(", name, ")"], 4),
                _ => Pieces::Owned(self.render()),
            },
            FieldExpr::Complex(..) => Pieces::Owned(self.render()),
        }
    }
}

impl Pieces<'_> {
    fn bytes(&self) -> impl Iterator<Item = u8> + '_ {
        let (parts, owned): (&[&str], &[u8]) = match self {
            Pieces::Borrowed(parts, n) => (&parts[..*n], &[]),
            Pieces::Owned(s) => (&[], s.as_bytes()),
        };
        parts.iter().flat_map(|p| p.bytes()).chain(owned.iter().copied())
    }
}

impl PartialEq for FieldExpr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FieldExpr {}

impl Hash for FieldExpr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for b in self.pieces().bytes() {
            state.write_u8(b);
        }
        state.write_u8(0xff);
    }
}

impl PartialOrd for FieldExpr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by canonical rendering.
impl Ord for FieldExpr {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (FieldExpr::Simple(a), FieldExpr::Simple(b)) = (self, other) {
            return a.cmp(b);
        }
        self.pieces().bytes().cmp(other.pieces().bytes())
    }
}

impl Serialize for FieldExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for FieldExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FieldExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

const RESERVED: [char; 6] = ['(', ')', '+', '×', '*', '/'];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, reason: &str) -> ParseFieldError {
        ParseFieldError {
            input: self.src.to_string(),
            offset: self.pos,
            reason: reason.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FieldExpr, ParseFieldError> {
        self.skip_ws();
        if self.bump('(') {
            let left = self.expr()?;
            self.skip_ws();
            let op = self
                .peek()
                .and_then(ComplexOp::from_symbol)
                .ok_or_else(|| self.error("expected complex operator"))?;
            self.pos += self.peek().map_or(0, char::len_utf8);
            let right = self.expr()?;
            self.skip_ws();
            if !self.bump(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(FieldExpr::complex(op, left, right));
        }

        let start = self.pos;
        let len = self.rest().find(|c| RESERVED.contains(&c)).unwrap_or(self.rest().len());
        let name = self.src[start..start + len].trim();
        self.pos = start + len;
        if name.is_empty() {
            return Err(self.error("expected attribute name"));
        }
        if self.peek() == Some('(') {
            let Some(op) = AggOp::from_keyword(name) else {
                return Err(self.error("unknown aggregation operator"));
            };
            self.pos += 1;
            let inner = self.expr()?;
            self.skip_ws();
            if !self.bump(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(FieldExpr::agg(op, inner));
        }
        Ok(FieldExpr::Simple(name.to_string()))
    }
}
