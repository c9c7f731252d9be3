//! Exact symbolic coefficients.
//!
//! A [`Coeff`] is a quotient of two polynomials with rational coefficients
//! over a small vocabulary of [`Atom`]s: named parameters, logarithms of
//! positive constants, exponentials of constants and the distinguished
//! constant `ln(2*pi)`. Monomials are Laurent (negative atom exponents are
//! allowed), so division by a single monomial never leaves a denominator.
//!
//! Zero recognition is exact for everything reachable through polynomial
//! identities over the atoms; nonlinear identities between parameters are
//! never discovered.

mod gcd;
mod interval;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use interval::{enclose, Interval};

use crate::error::{Error, Result};

/// Exact rational number used throughout the kernel.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q2(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Sign of a quantity as far as it can be decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
    Unknown,
}

impl Sign {
    pub fn of_q(v: &Q) -> Sign {
        if v.is_zero() {
            Sign::Zero
        } else if v.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            s => s,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        use Sign::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Unknown, _) | (_, Unknown) => Unknown,
            (a, b) if a == b => Positive,
            _ => Negative,
        }
    }

    pub fn is_definite(self) -> bool {
        matches!(self, Sign::Positive | Sign::Negative)
    }
}

/// Something that can answer sign queries about coefficients.
pub trait SignOracle {
    fn sign(&self, c: &Coeff) -> Sign;
}

/// Oracle that only knows parameter-free constants.
pub struct NoParams;

impl SignOracle for NoParams {
    fn sign(&self, c: &Coeff) -> Sign {
        c.numeric_sign().unwrap_or(Sign::Unknown)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Param(Arc<str>),
    /// Logarithm of a positive constant that does not split further: a
    /// prime, a single atom, or a primitive multi-term polynomial.
    Ln(Box<Poly>),
    /// Exponential of a nonzero constant with no integer logarithm parts.
    Exp(Box<Coeff>),
    /// `ln(2*pi)`, the constant in the Stirling series.
    Ln2Pi,
}

impl Atom {
    fn ln_of(p: Poly) -> Atom {
        Atom::Ln(Box::new(p))
    }
}

/// Laurent monomial over atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(BTreeMap<Atom, i32>);

impl Mono {
    pub fn one() -> Mono {
        Mono::default()
    }

    pub fn atom(a: Atom) -> Mono {
        let mut m = BTreeMap::new();
        m.insert(a, 1);
        Mono(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Atom, i32)> {
        self.0.iter().map(|(a, e)| (a, *e))
    }

    fn single_atom(&self) -> Option<&Atom> {
        match self.0.iter().next() {
            Some((a, 1)) if self.0.len() == 1 => Some(a),
            _ => None,
        }
    }

    fn inv(&self) -> Mono {
        Mono(self.0.iter().map(|(a, e)| (a.clone(), -e)).collect())
    }

    /// Product of two monomials. Exponential atoms are merged, which may
    /// release a rational factor (`exp(ln 2) = 2`).
    fn mul(&self, other: &Mono) -> (Q, Mono) {
        let mut out = self.0.clone();
        let mut exp_arg: Option<Coeff> = None;
        let mut take_exp = |out: &mut BTreeMap<Atom, i32>| {
            let keys: Vec<Atom> = out.keys().filter(|a| matches!(a, Atom::Exp(_))).cloned().collect();
            for k in keys {
                let e = out.remove(&k).unwrap();
                if let Atom::Exp(c) = k {
                    let part = c.scale(&q(e as i64));
                    exp_arg = Some(match exp_arg.take() {
                        Some(acc) => acc.add(&part),
                        None => part,
                    });
                }
            }
        };
        for (a, e) in &other.0 {
            let slot = out.entry(a.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                out.remove(a);
            }
        }
        take_exp(&mut out);
        let mut factor = Q::one();
        let mut mono = Mono(out);
        if let Some(arg) = exp_arg {
            let (f, m) = exp_parts_mono(arg);
            factor = f;
            let (f2, m2) = mono.mul_plain(&m);
            factor *= f2;
            mono = m2;
        }
        (factor, mono)
    }

    /// Product without exponential merging; callers guarantee at most one
    /// side carries an `Exp` atom.
    fn mul_plain(&self, other: &Mono) -> (Q, Mono) {
        let mut out = self.0.clone();
        for (a, e) in &other.0 {
            let slot = out.entry(a.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                out.remove(a);
            }
        }
        (Q::one(), Mono(out))
    }

    pub fn params(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        for a in self.0.keys() {
            match a {
                Atom::Param(p) => out.push(p.clone()),
                Atom::Ln(p) => out.extend(p.params()),
                Atom::Exp(c) => out.extend(c.params()),
                Atom::Ln2Pi => {}
            }
        }
        out
    }
}

/// Polynomial with rational coefficients over Laurent monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(BTreeMap<Mono, Q>);

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(v: Q) -> Poly {
        let mut p = Poly::zero();
        if !v.is_zero() {
            p.0.insert(Mono::one(), v);
        }
        p
    }

    pub fn mono(c: Q, m: Mono) -> Poly {
        let mut p = Poly::zero();
        p.add_term(c, m);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_const(&self) -> Option<Q> {
        match self.0.len() {
            0 => Some(Q::zero()),
            1 => self.0.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, c: Q, m: Mono) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(m.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(c.clone(), m.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let (f, m) = m1.mul(m2);
                out.add_term(c1 * c2 * f, m);
            }
        }
        out
    }

    fn mul_mono(&self, m: &Mono) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            let (f, mm) = m1.mul(m);
            out.add_term(c1 * f, mm);
        }
        out
    }

    fn lead(&self) -> Option<(&Mono, &Q)> {
        self.0.iter().next_back()
    }

    /// Largest rational `r > 0` and Laurent monomial `m` dividing every term.
    fn content(&self) -> (Q, Mono) {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.0.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let r = if num_gcd.is_zero() { Q::one() } else { Q::new(num_gcd, den_lcm) };
        // per atom: minimum exponent over all terms, absent atoms count as 0
        let mut mins: BTreeMap<Atom, i32> = BTreeMap::new();
        for m in self.0.keys() {
            for a in m.0.keys() {
                if matches!(a, Atom::Exp(_)) {
                    continue;
                }
                let lo = self.0.keys().map(|t| t.0.get(a).copied().unwrap_or(0)).min().unwrap_or(0);
                if lo != 0 {
                    mins.insert(a.clone(), lo);
                }
            }
        }
        (r, Mono(mins))
    }

    pub fn params(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        for m in self.0.keys() {
            out.extend(m.params());
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Quotient of two polynomials in lightly normalized form: the
/// denominator is either `1` or a multi-term polynomial with leading
/// coefficient `1` and no monomial content.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coeff {
    num: Poly,
    den: Poly,
}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::zero()
    }
}

impl From<Q> for Coeff {
    fn from(v: Q) -> Self {
        Coeff::from_q(v)
    }
}

impl From<i64> for Coeff {
    fn from(v: i64) -> Self {
        Coeff::from_q(q(v))
    }
}

impl Coeff {
    pub fn zero() -> Coeff {
        Coeff { num: Poly::zero(), den: Poly::constant(Q::one()) }
    }

    pub fn one() -> Coeff {
        Coeff::from_q(Q::one())
    }

    pub fn from_q(v: Q) -> Coeff {
        Coeff { num: Poly::constant(v), den: Poly::constant(Q::one()) }
    }

    pub fn from_poly(p: Poly) -> Coeff {
        Coeff { num: p, den: Poly::constant(Q::one()) }
    }

    pub fn param(name: &str) -> Coeff {
        Coeff::from_poly(Poly::mono(Q::one(), Mono::atom(Atom::Param(name.into()))))
    }

    pub fn ln_2pi() -> Coeff {
        Coeff::from_poly(Poly::mono(Q::one(), Mono::atom(Atom::Ln2Pi)))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.as_q().is_some_and(|v| v.is_one())
    }

    /// The value as a rational, when the coefficient is a plain number.
    pub fn as_q(&self) -> Option<Q> {
        if self.den.as_const() == Some(Q::one()) {
            self.num.as_const()
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.as_const() == Some(Q::one())
    }

    pub fn params(&self) -> Vec<Arc<str>> {
        let mut out = self.num.params();
        out.extend(self.den.params());
        out.sort();
        out.dedup();
        out
    }

    pub fn is_param_free(&self) -> bool {
        self.params().is_empty()
    }

    fn normalize(num: Poly, den: Poly) -> Coeff {
        match gcd::cancel(&num, &den) {
            Some((n, d)) => Coeff::reduce(n, d),
            None => Coeff::reduce(num, den),
        }
    }

    /// Scales to the canonical shape, assuming no common polynomial factor.
    fn reduce(mut num: Poly, mut den: Poly) -> Coeff {
        if num.is_zero() {
            return Coeff::zero();
        }
        if den.len() == 1 {
            let (m, c) = den.lead().map(|(m, c)| (m.clone(), c.clone())).unwrap();
            num = num.mul_mono(&m.inv()).scale(&c.recip());
            return Coeff::from_poly(num);
        }
        let (_, g) = den.content();
        if !g.is_one() {
            let gi = g.inv();
            den = den.mul_mono(&gi);
            num = num.mul_mono(&gi);
        }
        let lc = den.lead().map(|(_, c)| c.clone()).unwrap();
        if !lc.is_one() {
            let r = lc.recip();
            den = den.scale(&r);
            num = num.scale(&r);
        }
        let (lm, _) = den.lead().unwrap();
        if let Some(k) = num.0.get(lm) {
            if den.scale(k) == num {
                return Coeff::from_q(k.clone());
            }
        }
        Coeff { num, den }
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            return Coeff::normalize(self.num.add(&other.num), self.den.clone());
        }
        // a/b + c/d over lcm(b, d); only the shared factor can cancel
        match gcd::common(&self.den, &other.den) {
            Some(g) => {
                let (Some(b1), Some(d1)) = (gcd::divide(&self.den, &g), gcd::divide(&other.den, &g)) else {
                    return Coeff::normalize(
                        self.num.mul(&other.den).add(&other.num.mul(&self.den)),
                        self.den.mul(&other.den),
                    );
                };
                let num = self.num.mul(&d1).add(&other.num.mul(&b1));
                let den = self.den.mul(&d1);
                match gcd::common(&num, &g).and_then(|h| Some((gcd::divide(&num, &h)?, gcd::divide(&den, &h)?))) {
                    Some((n, d)) => Coeff::reduce(n, d),
                    None => Coeff::reduce(num, den),
                }
            }
            None => Coeff::reduce(self.num.mul(&other.den).add(&other.num.mul(&self.den)), self.den.mul(&other.den)),
        }
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Coeff {
        Coeff { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, k: &Q) -> Coeff {
        if k.is_zero() {
            return Coeff::zero();
        }
        Coeff { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        if self.is_zero() || other.is_zero() {
            return Coeff::zero();
        }
        if let Some(k) = other.as_q() {
            return self.scale(&k);
        }
        if let Some(k) = self.as_q() {
            return other.scale(&k);
        }
        // inputs are reduced, so only cross factors can cancel
        let cross = |n: &Poly, d: &Poly| -> (Poly, Poly) {
            if n == d {
                return (Poly::constant(Q::one()), Poly::constant(Q::one()));
            }
            gcd::cancel(n, d).unwrap_or_else(|| (n.clone(), d.clone()))
        };
        let (n1, d2) = cross(&self.num, &other.den);
        let (n2, d1) = cross(&other.num, &self.den);
        Coeff::reduce(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn inv(&self) -> Result<Coeff> {
        if self.is_zero() {
            return Err(Error::DivisionByExactZero);
        }
        Ok(Coeff::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Coeff) -> Result<Coeff> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow_int(&self, k: i64) -> Result<Coeff> {
        if k < 0 {
            return self.inv()?.pow_int(-k);
        }
        let mut acc = Coeff::one();
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        Ok(acc)
    }

    /// `exp(self)`, pulling integer multiples of logarithms back out as
    /// powers so that `exp(ln 2) = 2` and `exp(2 ln(1+a)) = (1+a)^2`.
    pub fn exp(&self) -> Coeff {
        if self.is_zero() {
            return Coeff::one();
        }
        if !self.is_polynomial() {
            return Coeff::from_poly(Poly::mono(Q::one(), Mono::atom(Atom::Exp(Box::new(self.clone())))));
        }
        let mut rest = Poly::zero();
        let mut acc = Coeff::one();
        for (m, c) in self.num.terms() {
            if let Some(Atom::Ln(p)) = m.single_atom() {
                if p.len() > 1 || p.as_const().is_none() && p.len() == 1 {
                    let whole = c.floor();
                    if !whole.is_zero() {
                        let k = whole.to_integer().to_i64().unwrap_or(0);
                        if k != 0 && k.abs() <= 64 {
                            let base = Coeff::from_poly((**p).clone());
                            if let Ok(pw) = base.pow_int(k) {
                                acc = acc.mul(&pw);
                                rest.add_term(c - &whole, m.clone());
                                continue;
                            }
                        }
                    }
                }
            }
            rest.add_term(c.clone(), m.clone());
        }
        if rest.is_zero() {
            return acc;
        }
        let (f, mono) = exp_parts_mono(Coeff::from_poly(rest));
        acc.mul(&Coeff::from_poly(Poly::mono(f, mono)))
    }

    /// Natural logarithm of a coefficient the caller has shown positive.
    pub fn ln(&self, oracle: &dyn SignOracle) -> Result<Coeff> {
        if self.is_zero() {
            return Err(Error::UndefinedAtPoint("ln(0)".into()));
        }
        if self.is_polynomial() {
            return Ok(ln_poly(&self.num, oracle));
        }
        match oracle.sign(&Coeff::from_poly(self.den.clone())) {
            Sign::Positive => Ok(ln_poly(&self.num, oracle).sub(&ln_poly(&self.den, oracle))),
            Sign::Negative => Ok(ln_poly(&self.num.neg(), oracle).sub(&ln_poly(&self.den.neg(), oracle))),
            _ => Err(Error::assumption(format!("({})", PolyDisplay(&self.den)))),
        }
    }

    /// Sign of a parameter-free coefficient from rigorous interval
    /// enclosures. `None` when parameters are present or the enclosures
    /// never separate from zero.
    pub fn numeric_sign(&self) -> Option<Sign> {
        if self.is_zero() {
            return Some(Sign::Zero);
        }
        if let Some(v) = self.as_q() {
            return Some(Sign::of_q(&v));
        }
        if !self.is_param_free() {
            return None;
        }
        for bits in [64u32, 160, 400, 1000] {
            if let Some(iv) = enclose(self, bits) {
                if iv.lo.is_positive() {
                    return Some(Sign::Positive);
                }
                if iv.hi.is_negative() {
                    return Some(Sign::Negative);
                }
            }
        }
        None
    }

    /// Floating point approximation of a parameter-free coefficient.
    pub fn approx(&self) -> Option<f64> {
        if let Some(v) = self.as_q() {
            return v.to_f64();
        }
        let iv = enclose(self, 64)?;
        let mid = (&iv.lo + &iv.hi) / q(2);
        mid.to_f64()
    }

    /// Linear form `sum(c_i * p_i) + c0` when the coefficient is affine in
    /// bare parameters.
    pub fn as_affine(&self) -> Option<(BTreeMap<Arc<str>, Q>, Q)> {
        if !self.is_polynomial() {
            return None;
        }
        let mut lin = BTreeMap::new();
        let mut c0 = Q::zero();
        for (m, c) in self.num.terms() {
            if m.is_one() {
                c0 = c.clone();
            } else if let Some(Atom::Param(p)) = m.single_atom() {
                lin.insert(p.clone(), c.clone());
            } else {
                return None;
            }
        }
        Some((lin, c0))
    }
}

impl Coeff {
    /// Expression with the same value; `ln(2*pi)` uses a parameter named
    /// `pi`.
    pub fn to_expr(&self) -> crate::expr::Expr {
        use crate::expr::Expr;
        let n = poly_expr(&self.num);
        if self.is_polynomial() {
            n
        } else {
            Expr::Div(Box::new(n), Box::new(poly_expr(&self.den)))
        }
    }
}

fn atom_expr(a: &Atom) -> crate::expr::Expr {
    use crate::expr::Expr;
    match a {
        Atom::Param(p) => Expr::Param(p.clone()),
        Atom::Ln(p) => Expr::Ln(Box::new(poly_expr(p))),
        Atom::Exp(c) => Expr::Exp(Box::new(c.to_expr())),
        Atom::Ln2Pi => Expr::Ln(Box::new(Expr::Mul(vec![Expr::int(2), Expr::param("pi")]))),
    }
}

fn poly_expr(p: &Poly) -> crate::expr::Expr {
    use crate::expr::Expr;
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        let mut fs = vec![Expr::Const(c.clone())];
        for (a, e) in m.atoms() {
            fs.push(Expr::Pow(Box::new(atom_expr(a)), Box::new(Expr::int(e as i64))));
        }
        terms.push(if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Mul(fs) });
    }
    match terms.len() {
        0 => Expr::int(0),
        1 => terms.pop().unwrap(),
        _ => Expr::Add(terms),
    }
}

fn prime_factors(mut n: BigInt) -> Vec<(BigInt, i64)> {
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(100_000);
    while &p * &p <= n && p <= limit {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

fn ln_rational(v: &Q) -> Coeff {
    let mut out = Poly::zero();
    for (p, e) in prime_factors(v.numer().abs()) {
        out.add_term(q(e), Mono::atom(Atom::ln_of(Poly::constant(Q::from_integer(p)))));
    }
    for (p, e) in prime_factors(v.denom().clone()) {
        out.add_term(q(-e), Mono::atom(Atom::ln_of(Poly::constant(Q::from_integer(p)))));
    }
    Coeff::from_poly(out)
}

fn ln_atom(a: &Atom, oracle: &dyn SignOracle) -> Option<Coeff> {
    match a {
        Atom::Exp(c) => Some((**c).clone()),
        other => {
            let c = Coeff::from_poly(Poly::mono(Q::one(), Mono::atom(other.clone())));
            if oracle.sign(&c) == Sign::Positive {
                Some(Coeff::from_poly(Poly::mono(
                    Q::one(),
                    Mono::atom(Atom::ln_of(Poly::mono(Q::one(), Mono::atom(other.clone())))),
                )))
            } else {
                None
            }
        }
    }
}

fn opaque_ln(p: &Poly) -> Coeff {
    Coeff::from_poly(Poly::mono(Q::one(), Mono::atom(Atom::ln_of(p.clone()))))
}

fn ln_poly(p: &Poly, oracle: &dyn SignOracle) -> Coeff {
    if let Some(v) = p.as_const() {
        return ln_rational(&v);
    }
    if p.len() == 1 {
        if let Some((m, c)) = p.lead() {
            if c.is_positive() {
                let mut acc = ln_rational(c);
                for (a, e) in m.atoms() {
                    match ln_atom(a, oracle) {
                        Some(l) => acc = acc.add(&l.scale(&q(e as i64))),
                        None => return opaque_ln(p),
                    }
                }
                return acc;
            }
        }
    }
    let (r, m) = p.content();
    let rest = p.scale(&r.recip()).mul_mono(&m.inv());
    let opaque = || {
        let prim = p.scale(&r.recip());
        ln_rational(&r).add(&Coeff::from_poly(Poly::mono(Q::one(), Mono::atom(Atom::ln_of(prim)))))
    };
    let mut acc = ln_rational(&r);
    for (a, e) in m.atoms() {
        match ln_atom(a, oracle) {
            Some(l) => acc = acc.add(&l.scale(&q(e as i64))),
            None => return opaque(),
        }
    }
    match rest.as_const() {
        Some(v) if v.is_one() => acc,
        Some(_) => opaque(),
        None => {
            if rest.len() == 1 {
                // a lone monomial with a sign flip: keep it opaque
                return opaque();
            }
            acc.add(&Coeff::from_poly(Poly::mono(Q::one(), Mono::atom(Atom::ln_of(rest)))))
        }
    }
}

/// Split `exp(c)` into a rational factor and a monomial, extracting integer
/// multiples of logarithms of primes and of single atoms.
fn exp_parts_mono(c: Coeff) -> (Q, Mono) {
    if c.is_zero() {
        return (Q::one(), Mono::one());
    }
    if !c.is_polynomial() {
        return (Q::one(), Mono::atom(Atom::Exp(Box::new(c))));
    }
    let mut factor = Q::one();
    let mut atoms: BTreeMap<Atom, i32> = BTreeMap::new();
    let mut rest = Poly::zero();
    for (m, k) in c.num.terms() {
        if let Some(Atom::Ln(p)) = m.single_atom() {
            let whole = k.floor();
            let w = whole.to_integer().to_i64().unwrap_or(0);
            if w != 0 && w.abs() <= 4096 {
                if let Some(v) = p.as_const() {
                    factor *= pow_q(&v, w);
                    rest.add_term(k - &whole, m.clone());
                    continue;
                }
                if p.len() == 1 {
                    if let Some((pm, pc)) = p.lead() {
                        if pc.is_one() {
                            if let Some(a) = pm.single_atom() {
                                if !matches!(a, Atom::Exp(_)) {
                                    *atoms.entry(a.clone()).or_insert(0) += w as i32;
                                    rest.add_term(k - &whole, m.clone());
                                    continue;
                                }
                            }
                        }
                    }
                }
            }
        }
        rest.add_term(k.clone(), m.clone());
    }
    atoms.retain(|_, e| *e != 0);
    if !rest.is_zero() {
        atoms.insert(Atom::Exp(Box::new(Coeff::from_poly(rest))), 1);
    }
    (factor, Mono(atoms))
}

fn pow_q(v: &Q, k: i64) -> Q {
    let mut acc = Q::one();
    let base = if k < 0 { v.recip() } else { v.clone() };
    for _ in 0..k.unsigned_abs() {
        acc *= &base;
    }
    acc
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Param(p) => write!(f, "{p}"),
            Atom::Ln(p) => write!(f, "ln({})", PolyDisplay(p)),
            Atom::Exp(c) => {
                if c.is_one() {
                    write!(f, "e")
                } else if let Some(v) = c.as_q() {
                    if v.is_integer() && v.is_positive() {
                        write!(f, "e^{v}")
                    } else {
                        write!(f, "e^({v})")
                    }
                } else {
                    write!(f, "exp({c})")
                }
            }
            Atom::Ln2Pi => write!(f, "ln(2*pi)"),
        }
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            match e {
                1 => write!(f, "{a}")?,
                e if *e > 0 => write!(f, "{a}^{e}")?,
                e => write!(f, "{a}^({e})")?,
            }
        }
        Ok(())
    }
}

pub(crate) struct PolyDisplay<'a>(pub &'a Poly);

fn fmt_q_abs(v: &Q) -> String {
    format!("{}", v.abs())
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            return write!(f, "0");
        }
        // constants last, everything else in reverse structural order
        let mut terms: Vec<(&Mono, &Q)> = self.0.terms().collect();
        terms.sort_by(|a, b| {
            (a.0.is_one(), a.1.is_negative()).cmp(&(b.0.is_one(), b.1.is_negative())).then_with(|| b.0.cmp(a.0))
        });
        for (i, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", fmt_q_abs(c))?;
            } else if c.abs().is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_q_abs(c))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", PolyDisplay(&self.num))
        } else {
            let n = PolyDisplay(&self.num).to_string();
            if self.num.len() > 1 {
                write!(f, "({n})/({})", PolyDisplay(&self.den))
            } else {
                write!(f, "{n}/({})", PolyDisplay(&self.den))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Coeff {
        Coeff::param("a")
    }

    #[test]
    fn rational_function_cancels_identical_factor() {
        let p = a().add(&Coeff::one());
        let r = p.inv().unwrap().mul(&p);
        assert!(r.is_one(), "{r}");
        let z = p.inv().unwrap().mul(&p).sub(&Coeff::one());
        assert!(z.is_zero());
    }

    #[test]
    fn logs_of_integers_split_into_primes() {
        let l4 = Coeff::from(4).ln(&NoParams).unwrap();
        let l2 = Coeff::from(2).ln(&NoParams).unwrap();
        assert!(l4.sub(&l2.scale(&q(2))).is_zero());
        let l6 = Coeff::from_q(q2(6, 5)).ln(&NoParams).unwrap();
        assert_eq!(l6.to_string(), "ln(3) + ln(2) - ln(5)");
    }

    #[test]
    fn exp_of_log_collapses() {
        let l2 = Coeff::from(2).ln(&NoParams).unwrap();
        assert_eq!(l2.exp().as_q(), Some(q(2)));
        let half = l2.scale(&q2(1, 2)).exp();
        assert!(half.as_q().is_none());
        assert_eq!(half.mul(&half).as_q(), Some(q(2)));
        let three_half = l2.scale(&q2(3, 2)).exp();
        assert!(three_half.sub(&half.scale(&q(2))).is_zero());
    }

    #[test]
    fn exp_and_ln_are_inverse_on_constants() {
        let c = Coeff::from(-2).exp();
        assert_eq!(c.to_string(), "e^(-2)");
        let back = c.ln(&NoParams).unwrap();
        assert_eq!(back.as_q(), Some(q(-2)));
    }

    #[test]
    fn numeric_sign_of_transcendental_constants() {
        let l2 = Coeff::from(2).ln(&NoParams).unwrap();
        let c = l2.sub(&Coeff::from_q(q2(1, 2)));
        assert_eq!(c.numeric_sign(), Some(Sign::Positive));
        let c = l2.sub(&Coeff::from_q(q2(7, 10)));
        assert_eq!(c.numeric_sign(), Some(Sign::Negative));
        let e = Coeff::one().exp().sub(&Coeff::from_q(q2(2718, 1000)));
        assert_eq!(e.numeric_sign(), Some(Sign::Positive));
        assert_eq!(Coeff::ln_2pi().sub(&Coeff::from_q(q2(18378, 10000))).numeric_sign(), Some(Sign::Positive));
    }

    #[test]
    fn affine_view() {
        let c = a().add(&Coeff::param("b").scale(&q(-2))).add(&Coeff::from(3));
        let (lin, c0) = c.as_affine().unwrap();
        assert_eq!(lin.len(), 2);
        assert_eq!(c0, q(3));
        assert!(a().mul(&a()).as_affine().is_none());
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(Coeff::zero().inv(), Err(Error::DivisionByExactZero));
    }
}
