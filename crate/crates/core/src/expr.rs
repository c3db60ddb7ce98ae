//! The closed-form expression grammar used by analytic spaces and maps.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | func '(' expr (',' expr)? ')' | '(' expr ')'
//! func   := abs | max | min
//! ```
//!
//! Identifiers `x` and `y` are the two arguments; any other identifier is a
//! named parameter resolved at evaluation time. Evaluation is total on finite
//! inputs except for division by zero and fractional powers of negatives,
//! both of which yield non-finite values that callers reject.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact::two_sum;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("expression error at offset {offset} in {source_text:?}: {message}")]
pub struct ExprError {
    pub source_text: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    Y,
    Param(String),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Abs(Box<Node>),
    Max(Box<Node>, Box<Node>),
    Min(Box<Node>, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let mut parser = Parser {
            src: source,
            bytes: source.as_bytes(),
            pos: 0,
        };
        let root = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.bytes.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Self {
            source: source.to_owned(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Names of the parameters the expression refers to.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_params(&self.root, &mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn uses_y(&self) -> bool {
        uses_y(&self.root)
    }

    pub fn eval(&self, x: f64, y: f64, params: &BTreeMap<String, f64>) -> Result<f64, String> {
        eval(&self.root, x, y, params)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let source = String::deserialize(deserializer)?;
        Expr::parse(&source).map_err(serde::de::Error::custom)
    }
}

fn collect_params(node: &Node, out: &mut Vec<String>) {
    match node {
        Node::Param(name) => out.push(name.clone()),
        Node::Num(_) | Node::X | Node::Y => {}
        Node::Neg(a) | Node::Abs(a) => collect_params(a, out),
        Node::Add(a, b)
        | Node::Sub(a, b)
        | Node::Mul(a, b)
        | Node::Div(a, b)
        | Node::Pow(a, b)
        | Node::Max(a, b)
        | Node::Min(a, b) => {
            collect_params(a, out);
            collect_params(b, out);
        }
    }
}

fn uses_y(node: &Node) -> bool {
    match node {
        Node::Y => true,
        Node::Num(_) | Node::X | Node::Param(_) => false,
        Node::Neg(a) | Node::Abs(a) => uses_y(a),
        Node::Add(a, b)
        | Node::Sub(a, b)
        | Node::Mul(a, b)
        | Node::Div(a, b)
        | Node::Pow(a, b)
        | Node::Max(a, b)
        | Node::Min(a, b) => uses_y(a) || uses_y(b),
    }
}

fn eval(node: &Node, x: f64, y: f64, params: &BTreeMap<String, f64>) -> Result<f64, String> {
    Ok(eval_dd(node, x, y, params)?.to_f64())
}

// Evaluation runs in double-double arithmetic and rounds once at the end, so
// forms such as abs(x-y)+min(x,y) return max(x,y) exactly instead of drifting
// by an ulp through two roundings.
fn eval_dd(node: &Node, x: f64, y: f64, params: &BTreeMap<String, f64>) -> Result<Dd, String> {
    let ev = |n: &Node| eval_dd(n, x, y, params);
    Ok(match node {
        Node::Num(v) => Dd::from(*v),
        Node::X => Dd::from(x),
        Node::Y => Dd::from(y),
        Node::Param(name) => Dd::from(
            *params
                .get(name)
                .ok_or_else(|| format!("unbound parameter {name:?}"))?,
        ),
        Node::Neg(a) => ev(a)?.neg(),
        Node::Add(a, b) => ev(a)?.add(ev(b)?),
        Node::Sub(a, b) => ev(a)?.add(ev(b)?.neg()),
        Node::Mul(a, b) => ev(a)?.mul(ev(b)?),
        Node::Div(a, b) => ev(a)?.div(ev(b)?),
        Node::Pow(a, b) => ev(a)?.pow(ev(b)?.to_f64()),
        Node::Abs(a) => ev(a)?.abs(),
        Node::Max(a, b) => {
            let (a, b) = (ev(a)?, ev(b)?);
            if a.lt(&b) {
                b
            } else {
                a
            }
        }
        Node::Min(a, b) => {
            let (a, b) = (ev(a)?, ev(b)?);
            if b.lt(&a) {
                b
            } else {
                a
            }
        }
    })
}

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

impl Dd {
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn is_finite(&self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    fn lt(&self, other: &Self) -> bool {
        self.hi < other.hi || (self.hi == other.hi && self.lo < other.lo)
    }

    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        if !s.is_finite() {
            return Self::from(s);
        }
        let (t, f) = two_sum(self.lo, other.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }

    fn mul(self, other: Self) -> Self {
        let p = self.hi * other.hi;
        if !p.is_finite() || p == 0.0 {
            return Self::from(p);
        }
        let e = self.hi.mul_add(other.hi, -p) + (self.hi * other.lo + self.lo * other.hi);
        quick_two_sum(p, e)
    }

    fn div(self, other: Self) -> Self {
        let q1 = self.hi / other.hi;
        if !q1.is_finite() || q1 == 0.0 {
            return Self::from(q1);
        }
        let r = self.add(other.mul(Self::from(q1)).neg());
        let q2 = r.hi / other.hi;
        let r = r.add(other.mul(Self::from(q2)).neg());
        let q3 = r.hi / other.hi;
        let q = quick_two_sum(q1, q2);
        q.add(Self::from(q3))
    }

    // Integer exponents by repeated squaring; others through powf.
    fn pow(self, exp: f64) -> Self {
        if exp.fract() != 0.0 || exp.abs() > 1024.0 {
            return Self::from(self.to_f64().powf(exp));
        }
        let mut n = exp.abs() as u32;
        let mut base = self;
        let mut acc = Self::from(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            n >>= 1;
        }
        if exp < 0.0 {
            Self::from(1.0).div(acc)
        } else if acc.is_finite() {
            acc
        } else {
            Self::from(acc.hi)
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError {
            source_text: self.src.to_owned(),
            offset: self.pos,
            message: message.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            // right associative: 2^3^2 = 2^(3^2)
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Node::Num).map_err(|_| ExprError {
            source_text: self.src.to_owned(),
            offset: start,
            message: format!("invalid number {text:?}"),
        })
    }

    fn ident(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        match name {
            "x" => Ok(Node::X),
            "y" => Ok(Node::Y),
            "abs" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b')')?;
                Ok(Node::Abs(Box::new(a)))
            }
            "max" | "min" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                Ok(if name == "max" {
                    Node::Max(Box::new(a), Box::new(b))
                } else {
                    Node::Min(Box::new(a), Box::new(b))
                })
            }
            _ => Ok(Node::Param(name.to_owned())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64, y: f64) -> f64 {
        let params = BTreeMap::from([("b".to_owned(), 2.0)]);
        Expr::parse(src).unwrap().eval(x, y, &params).unwrap()
    }

    #[test]
    fn grammar_covers_the_gallery_forms() {
        assert_eq!(ev("abs(x-y)+x", 0.25, 0.75), 0.75);
        assert_eq!(ev("max(x,y)", 0.3, 0.3), 0.3);
        assert_eq!(ev("abs(x - y) + min(x, y)", 2.0, 0.5), 2.0);
        assert_eq!(ev("max(x,y)^b + abs(x-y)^b", 1.5, 0.5), 3.25);
        assert_eq!(ev("1 + x*y/(1+x+y)", 0.0, 5.0), 1.0);
        assert_eq!(ev("2^b", 0.0, 0.0), 4.0);
        assert_eq!(ev("x/4", 1.0, 0.0), 0.25);
    }

    #[test]
    fn sums_round_once() {
        let e = Expr::parse("abs(x-y)+min(x,y)").unwrap();
        let none = BTreeMap::new();
        for i in 0..=40 {
            for j in 0..=40 {
                let (x, y) = (2.0 * i as f64 / 40.0, 2.0 * j as f64 / 40.0);
                assert_eq!(e.eval(x, y, &none).unwrap(), x.max(y), "{x} {y}");
            }
        }
        assert_eq!(ev("0.1 + 0.2 - 0.3", 0.0, 0.0), 2.7755575615628914e-17);
        assert_eq!(ev("1/3", 0.0, 0.0), 1.0 / 3.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 - 2 - 3", 0.0, 0.0), -4.0);
        assert_eq!(ev("2 * 3 + 4", 0.0, 0.0), 10.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(ev("1e-3 * 2", 0.0, 0.0), 0.002);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let err = Expr::parse("max(x y)").unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(Expr::parse("abs(x").is_err());
        assert!(Expr::parse("x +").is_err());
        assert!(Expr::parse("x ) ").is_err());
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        let e = Expr::parse("x^c").unwrap();
        assert_eq!(e.params(), vec!["c".to_owned()]);
        assert!(e.eval(1.0, 1.0, &BTreeMap::new()).is_err());
    }

    #[test]
    fn serializes_as_source_text() {
        let e = Expr::parse("max(x, y)").unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, "\"max(x, y)\"");
        let back: Expr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }
}
