//! Sign and order constraints on symbolic parameters.
//!
//! Constraints have the shape `combo REL combo` where each side is a
//! rational linear combination of parameters plus a constant. Equalities
//! are solved for their lexicographically last parameter and substituted
//! everywhere; the remaining inequalities answer sign queries about
//! coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::coeff::{Atom, Coeff, Poly, Sign, SignOracle, Q};
use crate::error::{Error, ParseError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
    Ne,
}

impl Rel {
    fn flip(self) -> Rel {
        match self {
            Rel::Gt => Rel::Lt,
            Rel::Lt => Rel::Gt,
            Rel::Ge => Rel::Le,
            Rel::Le => Rel::Ge,
            r => r,
        }
    }

    fn holds(self, v: &Q) -> bool {
        match self {
            Rel::Gt => v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Ge => !v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
            Rel::Ne => !v.is_zero(),
        }
    }

    fn compatible(self, other: Rel) -> bool {
        use Rel::*;
        !matches!(
            (self, other),
            (Gt, Lt)
                | (Lt, Gt)
                | (Gt, Le)
                | (Le, Gt)
                | (Gt, Eq)
                | (Eq, Gt)
                | (Lt, Ge)
                | (Ge, Lt)
                | (Lt, Eq)
                | (Eq, Lt)
                | (Eq, Ne)
                | (Ne, Eq)
        )
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Gt => ">",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
        })
    }
}

/// `sum(coef * param) + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Linear {
    pub terms: BTreeMap<Arc<str>, Q>,
    pub constant: Q,
}

impl Linear {
    fn param(name: &str, k: Q) -> Linear {
        let mut terms = BTreeMap::new();
        terms.insert(Arc::from(name), k);
        Linear { terms, constant: Q::zero() }
    }

    fn constant(v: Q) -> Linear {
        Linear { terms: BTreeMap::new(), constant: v }
    }

    fn add(&self, o: &Linear) -> Linear {
        let mut out = self.clone();
        for (p, k) in &o.terms {
            let slot = out.terms.entry(p.clone()).or_insert_with(Q::zero);
            *slot += k;
            if slot.is_zero() {
                out.terms.remove(p);
            }
        }
        out.constant += &o.constant;
        out
    }

    fn scale(&self, k: &Q) -> Linear {
        if k.is_zero() {
            return Linear::default();
        }
        Linear { terms: self.terms.iter().map(|(p, c)| (p.clone(), c * k)).collect(), constant: &self.constant * k }
    }

    fn substitute(&self, name: &str, by: &Linear) -> Linear {
        match self.terms.get(name) {
            None => self.clone(),
            Some(k) => {
                let mut rest = self.clone();
                let k = k.clone();
                rest.terms.remove(name);
                rest.add(&by.scale(&k))
            }
        }
    }

    pub fn to_coeff(&self) -> Coeff {
        let mut acc = Coeff::from_q(self.constant.clone());
        for (p, k) in &self.terms {
            acc = acc.add(&Coeff::param(p).scale(k));
        }
        acc
    }

    fn same_direction(&self, other: &Linear) -> Option<Q> {
        // other.terms == lambda * self.terms
        if self.terms.len() != other.terms.len() || self.terms.is_empty() {
            return None;
        }
        let mut lambda: Option<Q> = None;
        for (p, k) in &self.terms {
            let ko = other.terms.get(p)?;
            let r = ko / k;
            match &lambda {
                None => lambda = Some(r),
                Some(l) if *l == r => {}
                _ => return None,
            }
        }
        lambda
    }
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, k) in &self.terms {
            let neg = k.is_negative();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                _ => {}
            }
            first = false;
            if k.abs().is_one() {
                write!(f, "{p}")?;
            } else {
                write!(f, "{}*{p}", k.abs())?;
            }
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant.is_positive() {
            write!(f, " + {}", self.constant)
        } else if self.constant.is_negative() {
            write!(f, " - {}", -&self.constant)
        } else {
            Ok(())
        }
    }
}

/// `combo REL 0`, scaled so the first parameter has coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub combo: Linear,
    pub rel: Rel,
}

impl Constraint {
    fn canonical(combo: Linear, rel: Rel) -> Constraint {
        let lead = combo.terms.values().next().cloned();
        match lead {
            Some(k) if !k.is_one() => {
                let r = k.recip();
                let rel = if r.is_negative() { rel.flip() } else { rel };
                Constraint { combo: combo.scale(&r), rel }
            }
            _ => Constraint { combo, rel },
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.combo, self.rel)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Bound {
    value: Q,
    strict: bool,
}

#[derive(Clone, Debug, Default)]
struct Range {
    lo: Option<Bound>,
    hi: Option<Bound>,
    nonzero: bool,
}

impl Range {
    fn tighten_lo(&mut self, b: Bound) {
        let better = match &self.lo {
            None => true,
            Some(cur) => b.value > cur.value || (b.value == cur.value && b.strict && !cur.strict),
        };
        if better {
            self.lo = Some(b);
        }
    }

    fn tighten_hi(&mut self, b: Bound) {
        let better = match &self.hi {
            None => true,
            Some(cur) => b.value < cur.value || (b.value == cur.value && b.strict && !cur.strict),
        };
        if better {
            self.hi = Some(b);
        }
    }

    fn sign(&self) -> Sign {
        if let Some(lo) = &self.lo {
            if lo.value.is_positive() || (lo.value.is_zero() && lo.strict) {
                return Sign::Positive;
            }
        }
        if let Some(hi) = &self.hi {
            if hi.value.is_negative() || (hi.value.is_zero() && hi.strict) {
                return Sign::Negative;
            }
        }
        Sign::Unknown
    }
}

/// A bound value and whether it is strict.
type Limit = Option<(Q, bool)>;

/// A consistent-looking set of parameter constraints.
#[derive(Clone, Debug, Default)]
pub struct Assumptions {
    constraints: Vec<Constraint>,
    subst: Vec<(Arc<str>, Linear)>,
    ranges: BTreeMap<Arc<str>, Range>,
    /// Parameters whose implicit positivity was withdrawn by a stated
    /// constraint.
    free: BTreeSet<Arc<str>>,
}

impl Assumptions {
    pub fn new() -> Assumptions {
        Assumptions::default()
    }

    /// Parses a comma separated constraint list such as `a>0, mu+v<1`.
    pub fn parse(text: &str) -> Result<Assumptions> {
        let mut raw = Vec::new();
        if !text.trim().is_empty() {
            let mut p = LinParser { src: text, pos: 0 };
            loop {
                let lhs = p.linear()?;
                let rel = p.rel()?;
                let rhs = p.linear()?;
                raw.push((lhs.add(&rhs.scale(&-Q::one())), rel));
                p.skip_ws();
                if p.eat(',') {
                    continue;
                }
                if p.pos < p.src.len() {
                    return Err(p.error(&["','", "end of input"]));
                }
                break;
            }
        }
        Assumptions::from_raw(raw)
    }

    fn from_raw(raw: Vec<(Linear, Rel)>) -> Result<Assumptions> {
        let mut a = Assumptions::default();
        // parameters whose default positivity is withdrawn
        for (l, rel) in &raw {
            if l.terms.len() == 1 {
                let (p, k) = l.terms.iter().next().unwrap();
                let c = -&l.constant / k;
                let rel = if k.is_negative() { rel.flip() } else { *rel };
                let withdraw = match rel {
                    Rel::Ne | Rel::Eq => true,
                    Rel::Lt | Rel::Le => !c.is_positive(),
                    Rel::Gt => c.is_negative(),
                    Rel::Ge => !c.is_positive(),
                };
                if withdraw {
                    a.free.insert(p.clone());
                }
            }
        }
        let mut ineq = Vec::new();
        for (l, rel) in raw {
            if rel == Rel::Eq && !l.terms.is_empty() {
                let mut l = l;
                for (name, by) in &a.subst {
                    l = l.substitute(name, by);
                }
                if l.terms.is_empty() {
                    if !l.constant.is_zero() {
                        return Err(Error::Assumptions(format!("equality reduces to {} = 0", l.constant)));
                    }
                    continue;
                }
                let (name, k) = l.terms.iter().next_back().map(|(p, k)| (p.clone(), k.clone())).unwrap();
                let mut rest = l.clone();
                rest.terms.remove(&name);
                let by = rest.scale(&(-k.recip()));
                for (_, prev) in a.subst.iter_mut() {
                    *prev = prev.substitute(&name, &by);
                }
                if !a.free.contains(&name) {
                    ineq.push((by.clone(), Rel::Gt));
                }
                a.subst.push((name, by));
            } else {
                ineq.push((l, rel));
            }
        }
        let mut seen: Vec<Constraint> = Vec::new();
        for (l, rel) in ineq {
            let mut l = l;
            for (name, by) in &a.subst {
                l = l.substitute(name, by);
            }
            if l.terms.is_empty() {
                if !rel.holds(&l.constant) {
                    return Err(Error::Assumptions(format!("constraint reduces to {} {rel} 0", l.constant)));
                }
                continue;
            }
            let c = Constraint::canonical(l, rel);
            for s in &seen {
                if s.combo == c.combo && !s.rel.compatible(c.rel) {
                    return Err(Error::Assumptions(format!("contradictory constraints: {s} and {c}")));
                }
            }
            if c.combo.terms.len() == 1 {
                let (p, _) = c.combo.terms.iter().next().unwrap();
                let bound = -&c.combo.constant;
                let r = a.ranges.entry(p.clone()).or_default();
                match c.rel {
                    Rel::Gt => r.tighten_lo(Bound { value: bound, strict: true }),
                    Rel::Ge => r.tighten_lo(Bound { value: bound, strict: false }),
                    Rel::Lt => r.tighten_hi(Bound { value: bound, strict: true }),
                    Rel::Le => r.tighten_hi(Bound { value: bound, strict: false }),
                    Rel::Ne => {
                        if bound.is_zero() {
                            r.nonzero = true
                        }
                    }
                    Rel::Eq => {}
                }
            }
            seen.push(c);
        }
        a.constraints = seen;
        for (p, r) in &a.ranges {
            if let (Some(lo), Some(hi)) = (&r.lo, &r.hi) {
                let (ls, hs) = (lo.strict, hi.strict);
                if lo.value > hi.value || (lo.value == hi.value && (ls || hs)) {
                    return Err(Error::Assumptions(format!("empty range for {p}")));
                }
            }
        }
        Ok(a)
    }

    /// Parameter substitutions implied by equality constraints, in
    /// application order.
    pub fn substitutions(&self) -> &[(Arc<str>, Linear)] {
        &self.subst
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_eliminated(&self, name: &str) -> bool {
        self.subst.iter().any(|(p, _)| &**p == name)
    }

    fn range(&self, p: &Arc<str>) -> Range {
        let mut r = self.ranges.get(p).cloned().unwrap_or_default();
        if !self.free.contains(p) {
            r.tighten_lo(Bound { value: Q::zero(), strict: true });
        }
        r
    }

    fn param_sign(&self, p: &Arc<str>) -> (Sign, bool) {
        let r = self.range(p);
        let s = r.sign();
        (s, s.is_definite() || r.nonzero)
    }

    /// Lower and upper bounds of `lin` from per-parameter ranges, each with
    /// a strictness flag.
    fn bounds(&self, lin: &Linear) -> (Limit, Limit) {
        let mut lo: Limit = Some((lin.constant.clone(), false));
        let mut hi: Limit = Some((lin.constant.clone(), false));
        for (p, k) in &lin.terms {
            let r = self.range(p);
            let (lb, ub) = if k.is_positive() { (&r.lo, &r.hi) } else { (&r.hi, &r.lo) };
            lo = match (lo, lb) {
                (Some((v, s)), Some(b)) => Some((v + k * &b.value, s || b.strict)),
                _ => None,
            };
            hi = match (hi, ub) {
                (Some((v, s)), Some(b)) => Some((v + k * &b.value, s || b.strict)),
                _ => None,
            };
        }
        (lo, hi)
    }

    fn bounded_sign(bounds: &(Limit, Limit)) -> Sign {
        if let Some((v, s)) = &bounds.0 {
            if v.is_positive() || (v.is_zero() && *s) {
                return Sign::Positive;
            }
        }
        if let Some((v, s)) = &bounds.1 {
            if v.is_negative() || (v.is_zero() && *s) {
                return Sign::Negative;
            }
        }
        Sign::Unknown
    }

    fn linear_sign(&self, lin: &Linear) -> Sign {
        if lin.terms.is_empty() {
            return Sign::of_q(&lin.constant);
        }
        let s = Self::bounded_sign(&self.bounds(lin));
        if s.is_definite() {
            return s;
        }
        // lin = lambda * c + rest, with the sign of lambda * c fixed by a
        // stated constraint and rest bounded by the ranges
        for c in &self.constraints {
            let mut lambdas: Vec<Q> = c.combo.same_direction(lin).into_iter().collect();
            for (p, k) in &c.combo.terms {
                if let Some(kl) = lin.terms.get(p) {
                    lambdas.push(kl / k);
                }
            }
            for lambda in lambdas {
                let rest = lin.add(&c.combo.scale(&-lambda.clone()));
                let (lo, hi) = self.bounds(&rest);
                let rel = if lambda.is_negative() { c.rel.flip() } else { c.rel };
                let nonneg = |b: &Option<(Q, bool)>| b.as_ref().is_some_and(|(v, _)| !v.is_negative());
                let pos =
                    |b: &Option<(Q, bool)>| b.as_ref().is_some_and(|(v, s)| v.is_positive() || (v.is_zero() && *s));
                let nonpos = |b: &Option<(Q, bool)>| b.as_ref().is_some_and(|(v, _)| !v.is_positive());
                let neg =
                    |b: &Option<(Q, bool)>| b.as_ref().is_some_and(|(v, s)| v.is_negative() || (v.is_zero() && *s));
                let s = match rel {
                    Rel::Gt if nonneg(&lo) => Sign::Positive,
                    Rel::Ge | Rel::Eq if pos(&lo) => Sign::Positive,
                    Rel::Lt if nonpos(&hi) => Sign::Negative,
                    Rel::Le | Rel::Eq if neg(&hi) => Sign::Negative,
                    _ => Sign::Unknown,
                };
                if s.is_definite() {
                    return s;
                }
            }
        }
        Sign::Unknown
    }

    /// True when the coefficient is known to be nonzero, even if its sign
    /// is not.
    pub fn is_nonzero(&self, c: &Coeff) -> bool {
        if self.sign(c).is_definite() {
            return true;
        }
        self.poly_nonzero(c.numer())
    }

    fn poly_nonzero(&self, p: &Poly) -> bool {
        if p.len() != 1 {
            if let Some((lin, c0)) = Coeff::from_poly(p.clone()).as_affine() {
                let l = Linear { terms: lin, constant: c0 };
                return self.constraints.iter().any(|c| {
                    c.rel == Rel::Ne
                        && c.combo.same_direction(&l).is_some_and(|lambda| l.constant == lambda * &c.combo.constant)
                });
            }
            return false;
        }
        let (m, _) = p.terms().next().unwrap();
        m.atoms().all(|(a, _)| match a {
            Atom::Param(name) => self.param_sign(name).1,
            other => self.atom_sign(other).is_definite(),
        })
    }

    fn atom_sign(&self, a: &Atom) -> Sign {
        match a {
            Atom::Param(p) => self.param_sign(p).0,
            Atom::Ln(p) => self.sign(&Coeff::from_poly((**p).clone()).sub(&Coeff::one())),
            Atom::Exp(_) | Atom::Ln2Pi => Sign::Positive,
        }
    }

    fn poly_sign(&self, p: &Poly) -> Sign {
        if p.is_zero() {
            return Sign::Zero;
        }
        let as_coeff = Coeff::from_poly(p.clone());
        if let Some((lin, c0)) = as_coeff.as_affine() {
            let s = self.linear_sign(&Linear { terms: lin, constant: c0 });
            if s.is_definite() {
                return s;
            }
        }
        if as_coeff.is_param_free() {
            if let Some(s) = as_coeff.numeric_sign() {
                return s;
            }
        }
        let mut agreed: Option<Sign> = None;
        for (m, c) in p.terms() {
            let mut s = Sign::of_q(c);
            for (a, e) in m.atoms() {
                let sa = match a {
                    Atom::Param(name) => {
                        let (s, nonzero) = self.param_sign(name);
                        if e % 2 == 0 && nonzero {
                            Sign::Positive
                        } else {
                            s
                        }
                    }
                    other => self.atom_sign(other),
                };
                let sa = if e % 2 == 0 && sa.is_definite() { Sign::Positive } else { sa };
                s = s.times(sa);
            }
            match (agreed, s) {
                (_, Sign::Unknown) => return Sign::Unknown,
                (None, s) => agreed = Some(s),
                (Some(prev), s) if prev == s => {}
                _ => return Sign::Unknown,
            }
        }
        agreed.unwrap_or(Sign::Unknown)
    }
}

impl SignOracle for Assumptions {
    fn sign(&self, c: &Coeff) -> Sign {
        if c.is_zero() {
            return Sign::Zero;
        }
        if let Some(v) = c.as_q() {
            return Sign::of_q(&v);
        }
        if c.is_param_free() {
            if let Some(s) = c.numeric_sign() {
                return s;
            }
        }
        let n = self.poly_sign(c.numer());
        if c.is_polynomial() {
            return n;
        }
        n.times(self.poly_sign(c.denom()))
    }
}

impl fmt::Display for Assumptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.subst.iter().map(|(p, l)| format!("{p} = {l}")).collect();
        parts.extend(self.constraints.iter().map(|c| c.to_string()));
        write!(f, "{}", parts.join(", "))
    }
}

struct LinParser<'a> {
    src: &'a str,
    pos: usize,
}

impl LinParser<'_> {
    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> Error {
        let found = match self.src[self.pos..].chars().next() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        };
        Error::Parse(ParseError { offset: self.pos, expected: expected.iter().map(|s| s.to_string()).collect(), found })
    }

    fn rel(&mut self) -> Result<Rel> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        for (tok, rel) in [
            (">=", Rel::Ge),
            ("<=", Rel::Le),
            ("!=", Rel::Ne),
            ("==", Rel::Eq),
            (">", Rel::Gt),
            ("<", Rel::Lt),
            ("=", Rel::Eq),
        ] {
            if rest.starts_with(tok) {
                self.pos += tok.len();
                return Ok(rel);
            }
        }
        Err(self.error(&["relation"]))
    }

    fn number(&mut self) -> Option<Q> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        crate::expr::parse_decimal(&self.src[start..self.pos])
    }

    fn ident(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        if self.pos < bytes.len() && bytes[self.pos].is_ascii_alphabetic() {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            Some(&self.src[start..self.pos])
        } else {
            None
        }
    }

    fn factor(&mut self) -> Result<Linear> {
        let at = self.pos;
        if let Some(v) = self.number() {
            return Ok(Linear::constant(v));
        }
        self.pos = at;
        if let Some(name) = self.ident() {
            let name = name.to_string();
            return Ok(Linear::param(&name, Q::one()));
        }
        if self.eat('(') {
            let inner = self.linear()?;
            if !self.eat(')') {
                return Err(self.error(&["')'"]));
            }
            return Ok(inner);
        }
        Err(self.error(&["number", "parameter"]))
    }

    fn term(&mut self) -> Result<Linear> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                let at = self.pos;
                let rhs = self.factor()?;
                acc = if rhs.terms.is_empty() {
                    acc.scale(&rhs.constant)
                } else if acc.terms.is_empty() {
                    rhs.scale(&acc.constant)
                } else {
                    self.pos = at;
                    return Err(self.error(&["linear combination"]));
                };
            } else if self.eat('/') {
                let at = self.pos;
                let rhs = self.factor()?;
                if !rhs.terms.is_empty() || rhs.constant.is_zero() {
                    self.pos = at;
                    return Err(self.error(&["nonzero number"]));
                }
                acc = acc.scale(&rhs.constant.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn linear(&mut self) -> Result<Linear> {
        let mut acc = if self.eat('-') {
            self.term()?.scale(&-Q::one())
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.add(&self.term()?.scale(&-Q::one()));
            } else {
                return Ok(acc);
            }
        }
    }
}
