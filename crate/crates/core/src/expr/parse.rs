use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use super::Expr;
use crate::coeff::Q;
use crate::error::{Error, ParseError, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Op(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::End => "end of input".to_string(),
    }
}

/// Parses `123`, `1.25` or `.5` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<Q> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = BigInt::from(10u32).pow(frac.len() as u32);
    Some(Q::new(n, d))
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let mut v = parse_decimal(&src[start..i]).ok_or_else(|| {
                Error::Parse(ParseError {
                    offset: start,
                    expected: vec!["number".into()],
                    found: format!("'{}'", &src[start..i]),
                })
            })?;
            // a ratio literal p/q is a single token
            if bytes.get(i) == Some(&b'/') && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit()) && v.is_integer() {
                let dstart = i + 1;
                let mut j = dstart;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if bytes.get(j) != Some(&b'.') {
                    let d: BigInt = src[dstart..j].parse().unwrap();
                    if d.is_zero() {
                        return Err(Error::DivisionByExactZero);
                    }
                    v /= Q::from_integer(d);
                    i = j;
                }
            }
            out.push(Token { tok: Tok::Num(v), offset: start });
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), offset: start });
            continue;
        }
        if b"+-*/^()".contains(&c) {
            out.push(Token { tok: Tok::Op(c as char), offset: start });
            i += 1;
            continue;
        }
        let ch = src[i..].chars().next().unwrap();
        return Err(Error::Parse(ParseError {
            offset: start,
            expected: vec!["expression".into()],
            found: format!("'{ch}'"),
        }));
    }
    out.push(Token { tok: Tok::End, offset: src.len() });
    Ok(out)
}

/// Identifier resolution for the parser: which name is the main variable
/// and which are parameters.
#[derive(Clone, Debug, Default)]
pub struct Context {
    var: Option<Arc<str>>,
    params: BTreeSet<Arc<str>>,
}

/// A parsed, normalized expression with the name of its main variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parsed {
    pub expr: Expr,
    pub var: Arc<str>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    /// Fixes the main variable; every other identifier becomes a parameter.
    pub fn with_var(mut self, name: &str) -> Context {
        self.var = Some(Arc::from(name));
        self
    }

    pub fn with_params<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Context {
        self.params.extend(names.into_iter().map(Arc::from));
        self
    }

    pub fn var(&self) -> Option<&str> {
        self.var.as_deref()
    }

    pub fn parse(&self, text: &str) -> Result<Parsed> {
        let raw = self.parse_raw(text)?;
        let expr = raw.expr.normalize()?;
        Ok(Parsed { expr, var: raw.var })
    }

    /// Parses without normalizing.
    pub fn parse_raw(&self, text: &str) -> Result<Parsed> {
        let toks = lex(text)?;
        let mut p = Parser { toks, pos: 0, ctx: self, var: self.var.clone() };
        let expr = p.expr()?;
        if p.peek() != &Tok::End {
            return Err(p.error(&["operator", "end of input"]));
        }
        let var = p.var.unwrap_or_else(|| Arc::from("x"));
        Ok(Parsed { expr, var })
    }
}

/// Parses and normalizes with automatic variable detection: the single
/// undeclared identifier is the main variable.
pub fn parse(text: &str) -> Result<Expr> {
    Context::new().parse(text).map(|p| p.expr)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ctx: &'a Context,
    var: Option<Arc<str>>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn error(&self, expected: &[&str]) -> Error {
        Error::Parse(ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: describe(self.peek()),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == &Tok::Op(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.factor()?);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.eat('^') {
            let e = self.unary()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&["')'"]));
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.offset();
                self.pos += 1;
                if matches!(name.as_str(), "ln" | "exp" | "fact") {
                    if !self.eat('(') {
                        return Err(self.error(&["'('"]));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.error(&["')'"]));
                    }
                    return Ok(match name.as_str() {
                        "ln" => arg.ln(),
                        "exp" => arg.exp(),
                        _ => arg.fact(),
                    });
                }
                self.ident(&name, at)
            }
            _ => Err(self.error(&["number", "identifier", "'('"])),
        }
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Expr> {
        if let Some(v) = &self.var {
            if &**v == name {
                return Ok(Expr::Var);
            }
        }
        if self.ctx.params.contains(name) {
            return Ok(Expr::param(name));
        }
        if name == "e" {
            return Ok(Expr::e());
        }
        if self.ctx.var.is_some() {
            return Ok(Expr::param(name));
        }
        if self.var.is_none() {
            self.var = Some(Arc::from(name));
            return Ok(Expr::Var);
        }
        Err(Error::Parse(ParseError {
            offset: at,
            expected: vec![format!("main variable '{}' or a declared parameter", self.var.as_deref().unwrap())],
            found: format!("undeclared identifier '{name}'"),
        }))
    }
}
