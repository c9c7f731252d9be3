//! Gossamer numbers as truncated multiseries.
//!
//! A [`GNum`] is a finite sum of `coeff * monomial` terms in strictly
//! descending growth order, optionally followed by an O-term. The O-term
//! bounds everything that was cut off; a value without one is exact.
//! All expansions are taken in a variable `t -> +inf`; other points are
//! mapped there first (see [`Point::approach`]).

pub(crate) mod expand;
mod stirling;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::assume::Assumptions;
use crate::coeff::{q, q2, Coeff, Sign, SignOracle, Q};
use crate::error::{Error, Result};
use crate::expr::{print, Expr, Format};
use crate::point::Point;
use crate::scale::{cmp_monomials, Element, Monomial, DEPTH_LIMIT};

pub use expand::{default_order, expand, max_order, prepare, with_retry, DEFAULT_ORDER, RETRY_CAP};

pub type Term = (Coeff, Monomial);

/// Shared expansion settings.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub order: usize,
    pub point: Point,
    pub assume: Arc<Assumptions>,
}

impl Ctx {
    pub fn new(order: usize, point: Point, assume: Assumptions) -> Arc<Ctx> {
        Arc::new(Ctx { order: order.max(1), point, assume: Arc::new(assume) })
    }

    fn cmp(&self, a: &Monomial, b: &Monomial) -> Result<Ordering> {
        cmp_monomials(a, b, &self.assume)
    }
}

#[derive(Clone, Debug)]
pub struct GNum {
    terms: Vec<Term>,
    error: Option<Monomial>,
    ctx: Arc<Ctx>,
}

impl PartialEq for GNum {
    fn eq(&self, other: &GNum) -> bool {
        self.terms == other.terms && self.error == other.error && self.ctx.point == other.ctx.point
    }
}

fn sort_desc(mut v: Vec<Term>, ctx: &Ctx) -> Result<Vec<Term>> {
    if v.len() <= 1 {
        return Ok(v);
    }
    let right = v.split_off(v.len() / 2);
    let left = sort_desc(v, ctx)?;
    let right = sort_desc(right, ctx)?;
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut l = left.into_iter().peekable();
    let mut r = right.into_iter().peekable();
    loop {
        let take_left = match (l.peek(), r.peek()) {
            (Some(a), Some(b)) => ctx.cmp(&a.1, &b.1)? != Ordering::Less,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        out.push(if take_left { l.next() } else { r.next() }.unwrap());
    }
    Ok(out)
}

impl GNum {
    pub fn zero(ctx: &Arc<Ctx>) -> GNum {
        GNum { terms: Vec::new(), error: None, ctx: ctx.clone() }
    }

    pub fn constant(c: Coeff, ctx: &Arc<Ctx>) -> GNum {
        GNum::term(c, Monomial::one(), ctx)
    }

    /// A single term; no reordering is needed.
    pub fn term(c: Coeff, m: Monomial, ctx: &Arc<Ctx>) -> GNum {
        let terms = if c.is_zero() { Vec::new() } else { vec![(c, m)] };
        GNum { terms, error: None, ctx: ctx.clone() }
    }

    /// Combines like terms, orders them and applies the truncation budget.
    pub fn build(terms: Vec<Term>, mut error: Option<Monomial>, ctx: &Arc<Ctx>) -> Result<GNum> {
        let mut map: BTreeMap<Monomial, Coeff> = BTreeMap::new();
        for (c, m) in terms {
            if c.is_zero() {
                continue;
            }
            match map.get_mut(&m) {
                Some(acc) => *acc = acc.add(&c),
                None => {
                    map.insert(m, c);
                }
            }
        }
        let mut v = Vec::with_capacity(map.len());
        for (m, c) in map {
            if c.is_zero() {
                continue;
            }
            if let Some(e) = &error {
                if ctx.cmp(&m, e)? != Ordering::Greater {
                    continue;
                }
            }
            v.push((c, m));
        }
        let mut v = sort_desc(v, ctx)?;
        if v.len() > ctx.order {
            error = Some(v[ctx.order].1.clone());
            v.truncate(ctx.order);
        }
        Ok(GNum { terms: v, error, ctx: ctx.clone() })
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn error(&self) -> Option<&Monomial> {
        self.error.as_ref()
    }

    /// Further terms exist beyond the truncation.
    pub fn is_exhausted(&self) -> bool {
        self.error.is_some()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.error.is_none()
    }

    pub fn lead(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn order(&self) -> usize {
        self.ctx.order
    }

    pub fn point(&self) -> &Point {
        &self.ctx.point
    }

    pub fn assumptions(&self) -> &Assumptions {
        &self.ctx.assume
    }

    /// The leading monomial, or the O-term when no term is known.
    fn size(&self) -> Option<&Monomial> {
        self.lead().map(|t| &t.1).or(self.error.as_ref())
    }

    fn lead_or_more(&self) -> Result<&Term> {
        match self.lead() {
            Some(t) => Ok(t),
            None if self.error.is_some() => Err(Error::NeedMoreTerms),
            None => Err(Error::DivisionByExactZero),
        }
    }

    fn max_mono(&self, a: Option<Monomial>, b: Option<Monomial>) -> Result<Option<Monomial>> {
        Ok(match (a, b) {
            (Some(a), Some(b)) => Some(if self.ctx.cmp(&a, &b)? == Ordering::Less { b } else { a }),
            (a, b) => a.or(b),
        })
    }

    pub fn with_error(&self, e: Monomial) -> Result<GNum> {
        let error = self.max_mono(self.error.clone(), Some(e))?;
        GNum::build(self.terms.clone(), error, &self.ctx)
    }

    /// Same value, cut to at most `order` terms.
    pub fn truncated(&self, order: usize) -> Result<GNum> {
        let mut g = self.clone();
        if g.terms.len() > order {
            let cut = g.terms[order].1.clone();
            g.terms.truncate(order);
            g.error = Some(cut);
        }
        if g.ctx.order != order {
            g.ctx = Arc::new(Ctx { order, point: g.ctx.point.clone(), assume: g.ctx.assume.clone() });
        }
        Ok(g)
    }

    pub fn add(&self, o: &GNum) -> Result<GNum> {
        if o.is_exact_zero() {
            return Ok(self.clone());
        }
        if self.is_exact_zero() {
            return Ok(o.clone());
        }
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        let error = self.max_mono(self.error.clone(), o.error.clone())?;
        GNum::build(terms, error, &self.ctx)
    }

    pub fn neg(&self) -> GNum {
        GNum {
            terms: self.terms.iter().map(|(c, m)| (c.neg(), m.clone())).collect(),
            error: self.error.clone(),
            ctx: self.ctx.clone(),
        }
    }

    pub fn sub(&self, o: &GNum) -> Result<GNum> {
        self.add(&o.neg())
    }

    /// Multiplication by a single nonzero term keeps the term order.
    pub fn mul_term(&self, c: &Coeff, m: &Monomial) -> GNum {
        if c.is_zero() {
            return GNum::zero(&self.ctx);
        }
        GNum {
            terms: self.terms.iter().map(|(k, x)| (k.mul(c), x.mul(m))).collect(),
            error: self.error.as_ref().map(|e| e.mul(m)),
            ctx: self.ctx.clone(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> GNum {
        self.mul_term(c, &Monomial::one())
    }

    pub fn mul(&self, o: &GNum) -> Result<GNum> {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Ok(GNum::zero(&self.ctx));
        }
        if o.error.is_none() && o.terms.len() == 1 {
            let (c, m) = &o.terms[0];
            return Ok(self.mul_term(c, m));
        }
        if self.error.is_none() && self.terms.len() == 1 {
            let (c, m) = &self.terms[0];
            return Ok(o.mul_term(c, m));
        }
        let sa = self.size().unwrap().clone();
        let sb = o.size().unwrap().clone();
        let ea = self.error.as_ref().map(|e| e.mul(&sb));
        let eb = o.error.as_ref().map(|e| e.mul(&sa));
        let error = self.max_mono(ea, eb)?;
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (c1, m1) in &self.terms {
            for (c2, m2) in &o.terms {
                terms.push((c1.mul(c2), m1.mul(m2)));
            }
        }
        GNum::build(terms, error, &self.ctx)
    }

    /// `self = c*m*(1 + r)`; returns `(c, m, r)` with `r` infinitesimal.
    fn split_lead(&self) -> Result<(Coeff, Monomial, GNum)> {
        let (c, m) = self.lead_or_more()?.clone();
        let cinv = c.inv()?;
        let minv = m.inv();
        let mut r = self.mul_term(&cinv, &minv);
        r.terms.remove(0);
        Ok((c, m, r))
    }

    /// `sum_k a[k] r^k + O(r^(n+1))` for infinitesimal `r`.
    fn compose(r: &GNum, a: &[Q]) -> Result<GNum> {
        let ctx = &r.ctx;
        if r.is_exact_zero() {
            return Ok(GNum::constant(Coeff::from_q(a[0].clone()), ctx));
        }
        let size = r.size().unwrap().clone();
        if ctx.cmp(&size, &Monomial::one())? != Ordering::Less {
            return Err(Error::NeedMoreTerms);
        }
        let n = a.len() - 1;
        let mut s = GNum::constant(Coeff::from_q(a[n].clone()), ctx);
        for k in (0..n).rev() {
            s = GNum::constant(Coeff::from_q(a[k].clone()), ctx).add(&r.mul(&s)?)?;
        }
        s.with_error(size.pow(&Coeff::from((n + 1) as i64)))
    }

    fn series_len(&self) -> usize {
        self.ctx.order
    }

    pub fn inv(&self) -> Result<GNum> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByExactZero);
        }
        let (c, m, r) = self.split_lead()?;
        let n = self.series_len();
        let a: Vec<Q> = (0..=n).map(|k| if k % 2 == 0 { Q::one() } else { -Q::one() }).collect();
        let s = GNum::compose(&r, &a)?;
        Ok(s.mul_term(&c.inv()?, &m.inv()))
    }

    pub fn div(&self, o: &GNum) -> Result<GNum> {
        self.mul(&o.inv()?)
    }

    pub fn powi(&self, k: i64) -> Result<GNum> {
        if k < 0 {
            return self.inv()?.powi(-k);
        }
        let mut acc = GNum::constant(Coeff::one(), &self.ctx);
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn ln(&self) -> Result<GNum> {
        if self.is_exact_zero() {
            return Err(Error::UndefinedAtPoint("ln(0)".into()));
        }
        let (c, m, r) = self.split_lead()?;
        match self.ctx.assume.sign(&c) {
            Sign::Positive => {}
            Sign::Negative => return Err(Error::UndefinedAtPoint(format!("ln of a negative quantity ({c})"))),
            Sign::Zero => return Err(Error::NeedMoreTerms),
            Sign::Unknown => return Err(Error::assumption(&c)),
        }
        let mut terms = vec![(c.ln(self.ctx.assume.as_ref())?, Monomial::one())];
        for (e, k) in m.exponents() {
            let key = match e {
                Element::Log(j) if *j as usize + 1 > DEPTH_LIMIT => return Err(Error::DepthLimit(DEPTH_LIMIT)),
                other => other.key(),
            };
            terms.push((k.clone(), key));
        }
        let base = GNum::build(terms, None, &self.ctx)?;
        let n = self.series_len();
        let mut a = vec![Q::zero()];
        for k in 1..=n as i64 {
            a.push(if k % 2 == 1 { q2(1, k) } else { q2(-1, k) });
        }
        base.add(&GNum::compose(&r, &a)?)
    }

    pub fn exp(&self) -> Result<GNum> {
        let one = Monomial::one();
        if let Some(e) = &self.error {
            if self.ctx.cmp(e, &one)? != Ordering::Less {
                return Err(Error::NeedMoreTerms);
            }
        }
        let mut big = Monomial::one();
        let mut c0 = Coeff::zero();
        let mut small = Vec::new();
        for (c, m) in &self.terms {
            match self.ctx.cmp(m, &one)? {
                Ordering::Greater => {
                    let e = Element::exp_of(m.clone())?;
                    big = big.mul(&Monomial::power(e, c.clone()));
                }
                Ordering::Equal => c0 = c.clone(),
                Ordering::Less => small.push((c.clone(), m.clone())),
            }
        }
        let r = GNum { terms: small, error: self.error.clone(), ctx: self.ctx.clone() };
        let n = self.series_len();
        let mut a = vec![Q::one()];
        let mut f = Q::one();
        for k in 1..=n as i64 {
            f /= q(k);
            a.push(f.clone());
        }
        let s = GNum::compose(&r, &a)?;
        Ok(s.mul_term(&c0.exp(), &big))
    }

    /// Terms as `(coefficient, monomial)` expressions in the original
    /// variable.
    pub fn term_exprs(&self) -> Result<Vec<(Coeff, Expr)>> {
        self.terms.iter().map(|(c, m)| Ok((c.clone(), self.monomial_expr(m)?))).collect()
    }

    pub fn monomial_expr(&self, m: &Monomial) -> Result<Expr> {
        let e = m.to_expr();
        match self.ctx.point.retreat() {
            None => e.normalize(),
            Some(back) => e.substitute(&back),
        }
    }

    /// The truncated sum as an expression in the original variable.
    pub fn to_expr(&self) -> Result<Expr> {
        let mut parts = Vec::new();
        for (c, m) in self.term_exprs()? {
            parts.push(c.to_expr() * m);
        }
        match parts.len() {
            0 => Ok(Expr::int(0)),
            1 => parts.pop().unwrap().normalize(),
            _ => Expr::Add(parts).normalize(),
        }
    }

    /// One line per term, `coeff * monomial`, and a trailing O-term line.
    pub fn render_series(&self, var: &str) -> Result<Vec<String>> {
        let mut lines = Vec::new();
        for (c, m) in self.term_exprs()? {
            let cs = print(&c.to_expr().normalize()?, var, Format::Plain);
            if m.is_one() {
                lines.push(cs);
            } else if c.is_one() {
                lines.push(print(&m, var, Format::Plain));
            } else {
                lines.push(format!("{cs} * {}", print(&m, var, Format::Plain)));
            }
        }
        if lines.is_empty() && self.error.is_none() {
            lines.push("0".to_string());
        }
        if let Some(e) = &self.error {
            lines.push(format!("+ O({})", print(&self.monomial_expr(e)?, var, Format::Plain)));
        }
        Ok(lines)
    }

    pub fn render(&self, var: &str) -> Result<String> {
        let mut s = if self.terms.is_empty() { String::new() } else { print(&self.to_expr()?, var, Format::Plain) };
        if let Some(e) = &self.error {
            let o = format!("O({})", print(&self.monomial_expr(e)?, var, Format::Plain));
            s = if s.is_empty() { o } else { format!("{s} + {o}") };
        }
        if s.is_empty() {
            s.push('0');
        }
        Ok(s)
    }
}

impl fmt::Display for GNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.render("x") {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "{:?}", self.terms),
        }
    }
}

/// Split into infinitesimal, real and infinite parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Components {
    pub phi: GNum,
    pub real: Coeff,
    pub inf: GNum,
}

/// Which of the seven component patterns a value has.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Form {
    ExactZero,
    Phi,
    PhiReal,
    PhiInf,
    PhiRealInf,
    Real,
    RealInf,
    Inf,
}

impl Form {
    pub fn has_phi(self) -> bool {
        matches!(self, Form::Phi | Form::PhiReal | Form::PhiInf | Form::PhiRealInf)
    }

    pub fn has_real(self) -> bool {
        matches!(self, Form::PhiReal | Form::PhiRealInf | Form::Real | Form::RealInf)
    }

    pub fn has_inf(self) -> bool {
        matches!(self, Form::PhiInf | Form::PhiRealInf | Form::RealInf | Form::Inf)
    }

    /// Infinite overall: some infinite component is present.
    pub fn is_infinite(self) -> bool {
        self.has_inf()
    }

    /// Infinitesimal overall: only the infinitesimal component.
    pub fn is_infinitesimal(self) -> bool {
        self == Form::Phi
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::ExactZero => "0",
            Form::Phi => "Phi",
            Form::PhiReal => "Phi+R",
            Form::PhiInf => "Phi+Phi^-1",
            Form::PhiRealInf => "Phi+R+Phi^-1",
            Form::Real => "R",
            Form::RealInf => "R+Phi^-1",
            Form::Inf => "Phi^-1",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedReal {
    Finite(Coeff),
    PlusInfinity,
    MinusInfinity,
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(c) => write!(f, "{c}"),
            ExtendedReal::PlusInfinity => f.write_str("+inf"),
            ExtendedReal::MinusInfinity => f.write_str("-inf"),
        }
    }
}

pub fn components(x: &GNum) -> Result<Components> {
    let one = Monomial::one();
    if let Some(e) = &x.error {
        if x.ctx.cmp(e, &one)? != Ordering::Less {
            return Err(Error::NeedMoreTerms);
        }
    }
    let mut phi = Vec::new();
    let mut inf = Vec::new();
    let mut real = Coeff::zero();
    for (c, m) in &x.terms {
        match x.ctx.cmp(m, &one)? {
            Ordering::Greater => inf.push((c.clone(), m.clone())),
            Ordering::Equal => real = c.clone(),
            Ordering::Less => phi.push((c.clone(), m.clone())),
        }
    }
    Ok(Components {
        phi: GNum { terms: phi, error: x.error.clone(), ctx: x.ctx.clone() },
        real,
        inf: GNum { terms: inf, error: None, ctx: x.ctx.clone() },
    })
}

pub fn classify(x: &GNum) -> Result<Form> {
    if x.is_exact_zero() {
        return Ok(Form::ExactZero);
    }
    let c = components(x)?;
    let p = !c.phi.is_exact_zero();
    let r = !c.real.is_zero();
    let i = !c.inf.is_exact_zero();
    Ok(match (p, r, i) {
        (true, false, false) => Form::Phi,
        (true, true, false) => Form::PhiReal,
        (true, false, true) => Form::PhiInf,
        (true, true, true) => Form::PhiRealInf,
        (false, true, false) => Form::Real,
        (false, true, true) => Form::RealInf,
        (false, false, true) => Form::Inf,
        (false, false, false) => Form::ExactZero,
    })
}

pub fn sign_leading(x: &GNum) -> Result<Sign> {
    if x.is_exact_zero() {
        return Ok(Sign::Zero);
    }
    let (c, _) = x.lead_or_more()?;
    Ok(x.ctx.assume.sign(c))
}

/// Standard part: infinitesimals go to zero, infinities to a signed
/// infinity.
pub fn st(x: &GNum) -> Result<ExtendedReal> {
    if x.is_exact_zero() {
        return Ok(ExtendedReal::Finite(Coeff::zero()));
    }
    let one = Monomial::one();
    let Some((c, m)) = x.lead() else {
        let e = x.error.as_ref().unwrap();
        return if x.ctx.cmp(e, &one)? == Ordering::Less {
            Ok(ExtendedReal::Finite(Coeff::zero()))
        } else {
            Err(Error::NeedMoreTerms)
        };
    };
    match x.ctx.cmp(m, &one)? {
        Ordering::Less => Ok(ExtendedReal::Finite(Coeff::zero())),
        Ordering::Equal => Ok(ExtendedReal::Finite(c.clone())),
        Ordering::Greater => match x.ctx.assume.sign(c) {
            Sign::Positive => Ok(ExtendedReal::PlusInfinity),
            Sign::Negative => Ok(ExtendedReal::MinusInfinity),
            _ => Err(Error::assumption(c)),
        },
    }
}

/// Keeps only the leading term (`a + b = a` when `a` dominates `b`).
pub fn absorb(x: &GNum) -> GNum {
    match x.lead() {
        Some((c, m)) => GNum::term(c.clone(), m.clone(), &x.ctx),
        None => GNum::zero(&x.ctx),
    }
}

/// `ln x` dominates `ln y`.
pub fn logdom_gnum(x: &GNum, y: &GNum) -> Result<bool> {
    let lx = x.ln()?;
    let ly = y.ln()?;
    if lx.is_exact_zero() {
        return Ok(false);
    }
    if ly.is_exact_zero() {
        return Ok(true);
    }
    let (Some(a), Some(b)) = (lx.lead(), ly.lead()) else {
        return Err(Error::NeedMoreTerms);
    };
    Ok(x.ctx.cmp(&a.1, &b.1)? == Ordering::Greater)
}

/// `x * y`, or just `x` when `x` log-dominates `y`.
pub fn absorb_product(x: &GNum, y: &GNum) -> Result<GNum> {
    if y.error.is_none() && y.terms.len() == 1 && y.terms[0].0.is_one() && y.terms[0].1.is_one() {
        return Ok(x.clone());
    }
    if logdom_gnum(x, y)? {
        Ok(x.clone())
    } else {
        x.mul(y)
    }
}

/// Orders sum terms by decreasing growth at infinity; keeps the input
/// order when the terms cannot be ranked.
pub fn sort_by_growth(ts: &[Expr]) -> Vec<Expr> {
    let ctx = Ctx::new(2, Point::Infinity, Assumptions::new());
    let mut keyed = Vec::with_capacity(ts.len());
    for t in ts {
        let Ok(prepared) = t.normalize() else {
            return ts.to_vec();
        };
        match expand::expand_in(&prepared, &ctx).ok().and_then(|g| g.lead().map(|l| l.1.clone())) {
            Some(m) => keyed.push((m, t.clone())),
            None => return ts.to_vec(),
        }
    }
    let mut sorted: Vec<(Monomial, Expr)> = Vec::with_capacity(keyed.len());
    for item in keyed {
        let mut at = sorted.len();
        for (i, other) in sorted.iter().enumerate() {
            match cmp_monomials(&item.0, &other.0, &ctx.assume) {
                Ok(Ordering::Greater) => {
                    at = i;
                    break;
                }
                Ok(_) => {}
                Err(_) => return ts.to_vec(),
            }
        }
        sorted.insert(at, item);
    }
    let keyed = sorted;
    keyed.into_iter().map(|(_, t)| t).collect()
}
