//! A small expression language for seed, base and scale functions.
//!
//! Grammar, loosest binding first: `+ -`, then `* /`, then unary `-`, then
//! right-associative `^`. Atoms are decimal literals, the variable `x`, the
//! constants `pi` and `e`, parenthesised expressions and calls to `sin`,
//! `cos`, `tan`, `exp`, `log`, `abs`, `sqrt`. There is no implicit
//! multiplication, so `3x` is rejected.

use std::fmt;

use thiserror::Error;

/// Largest integer exponent evaluated by repeated multiplication.
const MAX_INTEGER_POWER: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    /// (left, right) binding power
    fn binding(self) -> (u8, u8) {
        match self {
            BinOp::Add | BinOp::Sub => (1, 2),
            BinOp::Mul | BinOp::Div => (3, 4),
            BinOp::Pow => (8, 7),
        }
    }
}

const PREFIX_MINUS: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    const ALL: [Func; 7] =
        [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Log, Func::Abs, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

/// Syntax tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Const(Constant),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    Unexpected(String),
    UnknownIdentifier(String),
    UnexpectedEnd,
}

/// Syntax error with the byte offset at which parsing failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "empty expression")?,
            ParseErrorKind::Unexpected(tok) => write!(f, "unexpected {tok} at offset {}", self.offset)?,
            ParseErrorKind::UnknownIdentifier(id) => {
                write!(f, "unknown identifier '{id}' at offset {}", self.offset)?
            }
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input at offset {}", self.offset)?,
        }
        if !self.expected.is_empty() {
            write!(f, "; expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// Evaluation left the real domain (log or sqrt of a negative number,
/// division by zero, overflow).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{subexpression}` at x = {x}: {reason}")]
pub struct EvalError {
    pub subexpression: String,
    pub x: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(BinOp),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(id) => format!("identifier '{id}'"),
            Tok::Op(op) => format!("'{}'", op.symbol()),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const EXPECT_OPERAND: [&str; 4] = ["number", "identifier", "'('", "'-'"];
const EXPECT_OPERATOR: [&str; 6] = ["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Op(BinOp::Add),
            b'-' => Tok::Op(BinOp::Sub),
            b'*' => Tok::Op(BinOp::Mul),
            b'/' => Tok::Op(BinOp::Div),
            b'^' => Tok::Op(BinOp::Pow),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent only when digits follow, so `2e` stays `2` then `e`
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::Unexpected(format!("malformed number '{lit}'")),
                    expected: vec!["number"],
                })?;
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::Unexpected(format!("character '{ch}'")),
                    expected: Vec::new(),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        let (offset, tok) = self.peek();
        let kind = match tok {
            Tok::End => ParseErrorKind::UnexpectedEnd,
            other => ParseErrorKind::Unexpected(other.describe()),
        };
        ParseError { offset: *offset, kind, expected: expected.to_vec() }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek().1 == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&["')'", "operator"]))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Node, ParseError> {
        let mut lhs = self.operand()?;
        loop {
            let op = match &self.peek().1 {
                Tok::Op(op) => *op,
                Tok::End | Tok::RParen => break,
                _ => return Err(self.unexpected(&EXPECT_OPERATOR)),
            };
            let (lbp, rbp) = op.binding();
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn operand(&mut self) -> Result<Node, ParseError> {
        let (offset, tok) = self.peek().clone();
        match tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Num(v))
            }
            Tok::Op(BinOp::Sub) => {
                self.bump();
                Ok(Node::Neg(Box::new(self.expr(PREFIX_MINUS)?)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(0)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "x" => Ok(Node::Var),
                    "pi" => Ok(Node::Const(Constant::Pi)),
                    "e" => Ok(Node::Const(Constant::E)),
                    _ => {
                        let func = Func::lookup(&name).ok_or_else(|| ParseError {
                            offset,
                            kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                            expected: Vec::new(),
                        })?;
                        if self.peek().1 != Tok::LParen {
                            return Err(self.unexpected(&["'('"]));
                        }
                        self.bump();
                        let arg = self.expr(0)?;
                        self.expect_rparen()?;
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                }
            }
            _ => Err(self.unexpected(&EXPECT_OPERAND)),
        }
    }
}

/// A parsed real-valued expression in the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        if text.trim().is_empty() {
            return Err(ParseError { offset: 0, kind: ParseErrorKind::Empty, expected: EXPECT_OPERAND.to_vec() });
        }
        let mut parser = Parser { toks: lex(text)?, pos: 0 };
        let root = parser.expr(0)?;
        if parser.peek().1 != Tok::End {
            return Err(parser.unexpected(&EXPECT_OPERATOR));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, EvalError> {
        eval(&self.root, x)
    }

    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>, EvalError> {
        xs.iter().map(|&x| self.evaluate(x)).collect()
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

fn domain(node: &Node, x: f64, reason: impl Into<String>) -> EvalError {
    EvalError { subexpression: node.to_string(), x, reason: reason.into() }
}

fn finite(node: &Node, x: f64, v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(node, x, format!("non-finite result {v}")))
    }
}

/// `base^exp` with exact repeated multiplication for small integer exponents.
pub(crate) fn real_pow(base: f64, exp: f64) -> Option<f64> {
    if exp.fract() == 0.0 && exp.abs() <= MAX_INTEGER_POWER {
        let mut acc = 1.0;
        for _ in 0..exp.abs() as u32 {
            acc *= base;
        }
        return if exp < 0.0 { (acc != 0.0).then(|| 1.0 / acc) } else { Some(acc) };
    }
    if base < 0.0 {
        None
    } else if base == 0.0 {
        (exp > 0.0).then_some(0.0)
    } else {
        Some((exp * base.ln()).exp())
    }
}

fn eval(node: &Node, x: f64) -> Result<f64, EvalError> {
    let v = match node {
        Node::Num(v) => *v,
        Node::Var => x,
        Node::Const(c) => c.value(),
        Node::Neg(a) => -eval(a, x)?,
        Node::Binary(op, a, b) => {
            let (a, b) = (eval(a, x)?, eval(b, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(domain(node, x, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => real_pow(a, b)
                    .ok_or_else(|| domain(node, x, format!("{a} ^ {b} is not a real number")))?,
            }
        }
        Node::Call(func, arg) => {
            let a = eval(arg, x)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Exp => a.exp(),
                Func::Abs => a.abs(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(domain(node, x, format!("log of non-positive argument {a}")));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(domain(node, x, format!("sqrt of negative argument {a}")));
                    }
                    a.sqrt()
                }
            }
        }
    };
    finite(node, x, v)
}

/// Canonical, fully parenthesised form; parsing it yields the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var => write!(f, "x"),
            Node::Const(Constant::Pi) => write!(f, "pi"),
            Node::Const(Constant::E) => write!(f, "e"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str, x: f64) -> f64 {
        Expression::parse(text).unwrap().evaluate(x).unwrap()
    }

    #[test]
    fn figure_expressions_parse() {
        assert!(Expression::parse("sin(3*pi*x)").is_ok());
        assert!(Expression::parse("x/8").is_ok());
        assert!(Expression::parse("exp(x)").is_ok());
    }

    #[test]
    fn double_star_is_rejected_at_offset_two() {
        let err = Expression::parse("2**x").unwrap_err();
        assert_eq!(err.offset, 2);
        assert_eq!(err.kind, ParseErrorKind::Unexpected("'*'".into()));
        assert!(err.expected.contains(&"number"));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(Expression::parse("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(Expression::parse("   ").unwrap_err().kind, ParseErrorKind::Empty);
        let err = Expression::parse("3x").unwrap_err();
        assert_eq!(err.offset, 1);
        let err = Expression::parse("foo(x)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        assert_eq!(Expression::parse("(x + 1").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert!(Expression::parse("sin x").is_err());
        assert!(Expression::parse("x)").is_err());
        assert!(Expression::parse("1.2.3").is_err());
        assert!(Expression::parse("x # 2").is_err());
    }

    #[test]
    fn evaluation_examples() {
        assert!((ev("sin(3*pi*x)", 0.5) + 1.0).abs() < 1e-15);
        assert_eq!(ev("x/8", 3.0), 0.375);
        assert_eq!(ev("exp(x)", 0.0), 1.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(ev("-x ^ 2", 3.0), -9.0);
        assert_eq!(ev("-2 * 3", 0.0), -6.0);
        assert_eq!(ev("2 ^ -1", 0.0), 0.5);
        assert_eq!(ev("10 - 4 - 3", 0.0), 3.0);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("1.5e2 + e", 0.0), 150.0 + std::f64::consts::E);
        assert_eq!(ev("abs(-x)", 2.0), 2.0);
    }

    #[test]
    fn powers() {
        assert_eq!(ev("x^3", -2.0), -8.0);
        assert_eq!(ev("x^0", 0.0), 1.0);
        assert!((ev("x^0.5", 4.0) - 2.0).abs() < 1e-15);
        assert!(Expression::parse("x^0.5").unwrap().evaluate(-4.0).is_err());
        assert!(Expression::parse("x^-1").unwrap().evaluate(0.0).is_err());
    }

    #[test]
    fn domain_errors() {
        let e = Expression::parse("1 + sqrt(x)").unwrap();
        let err = e.evaluate(-1.0).unwrap_err();
        assert_eq!(err.subexpression, "sqrt(x)");
        assert!(Expression::parse("log(x)").unwrap().evaluate(0.0).is_err());
        assert!(Expression::parse("log(x)").unwrap().evaluate(-1.0).is_err());
        assert!(Expression::parse("1/x").unwrap().evaluate(0.0).is_err());
        assert!(Expression::parse("exp(x)").unwrap().evaluate(1000.0).is_err());
    }

    #[test]
    fn sampling() {
        assert_eq!(Expression::parse("x").unwrap().sample(&[0.0, 1.0, 2.0]).unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(Expression::parse("1").unwrap().sample(&[-3.0, 7.5]).unwrap(), vec![1.0, 1.0]);
        assert!(Expression::parse("sqrt(x)").unwrap().sample(&[1.0, -1.0, 2.0]).is_err());
    }

    #[test]
    fn canonical_print_round_trips() {
        for text in ["sin(3*pi*x)", "-x^2 + 1/(x+2)", "2^-x^2", "exp(-(x-1.5)^2) * e", "0.1 + 1e-7*x"] {
            let once = Expression::parse(text).unwrap();
            let twice = Expression::parse(&once.to_string()).unwrap();
            assert_eq!(once, twice, "{text} -> {once}");
        }
    }
}
