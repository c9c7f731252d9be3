//! Canonical form for expressions.
//!
//! Every expression is brought to a quotient of two sums of products.
//! Products are built from parameters, the main variable, logarithms,
//! factorials and at most one exponential, whose arguments are themselves
//! normalized. Exponentials of sums are merged (`e^a * e^b = e^(a+b)`),
//! integer multiples of logarithms inside exponentials become powers and
//! `ln(e^u) = u`. Common monomial factors and integer content cancel
//! between numerator and denominator; no polynomial gcd is attempted.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Expr;
use crate::coeff::{q, Q};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Factor {
    Param(Arc<str>),
    Var,
    Ln(Box<Expr>),
    Fact(Box<Expr>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Prod {
    factors: BTreeMap<Factor, u32>,
    exp: Option<Box<Expr>>,
}

impl Prod {
    fn factor(f: Factor) -> Prod {
        let mut factors = BTreeMap::new();
        factors.insert(f, 1);
        Prod { factors, exp: None }
    }

    fn is_one(&self) -> bool {
        self.factors.is_empty() && self.exp.is_none()
    }

    fn var_degree(&self) -> u32 {
        self.factors.get(&Factor::Var).copied().unwrap_or(0)
    }
}

type Poly = BTreeMap<Prod, Q>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rat {
    num: Poly,
    den: Poly,
}

fn poly_const(v: Q) -> Poly {
    let mut p = Poly::new();
    if !v.is_zero() {
        p.insert(Prod::default(), v);
    }
    p
}

fn poly_add_term(p: &mut Poly, prod: Prod, c: Q) {
    if c.is_zero() {
        return;
    }
    let slot = p.entry(prod.clone()).or_insert_with(Q::zero);
    *slot += c;
    if slot.is_zero() {
        p.remove(&prod);
    }
}

fn poly_as_const(p: &Poly) -> Option<Q> {
    match p.len() {
        0 => Some(Q::zero()),
        1 => p.get(&Prod::default()).cloned(),
        _ => None,
    }
}

fn poly_scale(p: &Poly, k: &Q) -> Poly {
    if k.is_zero() {
        return Poly::new();
    }
    p.iter().map(|(m, c)| (m.clone(), c * k)).collect()
}

impl Rat {
    fn constant(v: Q) -> Rat {
        Rat { num: poly_const(v), den: poly_const(Q::one()) }
    }

    fn prod(p: Prod) -> Rat {
        let mut num = Poly::new();
        num.insert(p, Q::one());
        Rat { num, den: poly_const(Q::one()) }
    }

    fn from_poly(num: Poly) -> Rat {
        Rat { num, den: poly_const(Q::one()) }
    }

    fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    fn is_poly(&self) -> bool {
        poly_as_const(&self.den).is_some_and(|v| v.is_one())
    }

    fn as_const(&self) -> Option<Q> {
        if self.is_poly() {
            poly_as_const(&self.num)
        } else {
            None
        }
    }

    fn neg(&self) -> Rat {
        Rat { num: poly_scale(&self.num, &-Q::one()), den: self.den.clone() }
    }
}

const MAX_INT_POWER: i64 = 256;

pub(crate) fn normalize(e: &Expr) -> Result<Expr> {
    Ok(to_expr(&norm(e)?))
}

fn norm(e: &Expr) -> Result<Rat> {
    match e {
        Expr::Const(v) => Ok(Rat::constant(v.clone())),
        Expr::Param(p) => Ok(Rat::prod(Prod::factor(Factor::Param(p.clone())))),
        Expr::Var => Ok(Rat::prod(Prod::factor(Factor::Var))),
        Expr::Add(ts) => {
            let mut acc = Rat::constant(Q::zero());
            for t in ts {
                acc = add(&acc, &norm(t)?)?;
            }
            Ok(acc)
        }
        Expr::Neg(a) => Ok(norm(a)?.neg()),
        Expr::Mul(fs) => {
            let mut acc = Rat::constant(Q::one());
            for f in fs {
                acc = mul(&acc, &norm(f)?)?;
                if acc.is_zero() {
                    return Ok(acc);
                }
            }
            Ok(acc)
        }
        Expr::Div(a, b) => {
            let d = norm(b)?;
            if d.is_zero() {
                return Err(Error::DivisionByExactZero);
            }
            mul(&norm(a)?, &inv(&d)?)
        }
        Expr::Ln(a) => ln(&norm(a)?),
        Expr::Exp(a) => exp(&norm(a)?),
        Expr::Pow(b, x) => pow(&norm(b)?, &norm(x)?),
        Expr::Fact(a) => fact(&norm(a)?),
    }
}

fn add(a: &Rat, b: &Rat) -> Result<Rat> {
    if a.is_zero() {
        return Ok(b.clone());
    }
    if b.is_zero() {
        return Ok(a.clone());
    }
    if a.den == b.den {
        let mut num = a.num.clone();
        for (m, c) in &b.num {
            poly_add_term(&mut num, m.clone(), c.clone());
        }
        return simplify(num, a.den.clone());
    }
    let n1 = poly_mul(&a.num, &b.den)?;
    let n2 = poly_mul(&b.num, &a.den)?;
    let d = poly_mul(&a.den, &b.den)?;
    let n = add(&n1, &n2)?;
    div(&n, &d)
}

fn mul(a: &Rat, b: &Rat) -> Result<Rat> {
    if a.is_zero() || b.is_zero() {
        return Ok(Rat::constant(Q::zero()));
    }
    if let Some(k) = b.as_const() {
        return Ok(Rat { num: poly_scale(&a.num, &k), den: a.den.clone() });
    }
    if let Some(k) = a.as_const() {
        return Ok(Rat { num: poly_scale(&b.num, &k), den: b.den.clone() });
    }
    let n = poly_mul(&a.num, &b.num)?;
    if a.is_poly() && b.is_poly() {
        return Ok(n);
    }
    let d = poly_mul(&a.den, &b.den)?;
    div(&n, &d)
}

/// `n / d` for quotients that came out of polynomial products.
fn div(n: &Rat, d: &Rat) -> Result<Rat> {
    if d.is_zero() {
        return Err(Error::DivisionByExactZero);
    }
    if n.is_poly() && d.is_poly() {
        return simplify(n.num.clone(), d.num.clone());
    }
    mul(n, &inv(d)?)
}

fn inv(a: &Rat) -> Result<Rat> {
    if a.is_zero() {
        return Err(Error::DivisionByExactZero);
    }
    simplify(a.den.clone(), a.num.clone())
}

fn poly_mul(a: &Poly, b: &Poly) -> Result<Rat> {
    let mut plain = Poly::new();
    let mut extra: Option<Rat> = None;
    for (m1, c1) in a {
        for (m2, c2) in b {
            match prod_mul(m1, m2)? {
                Ok(m) => poly_add_term(&mut plain, m, c1 * c2),
                Err(r) => {
                    let scaled = Rat { num: poly_scale(&r.num, &(c1 * c2)), den: r.den };
                    extra = Some(match extra {
                        None => scaled,
                        Some(acc) => add(&acc, &scaled)?,
                    });
                }
            }
        }
    }
    let base = Rat::from_poly(plain);
    match extra {
        None => Ok(base),
        Some(r) => add(&base, &r),
    }
}

/// Product of two monomials; `Err` carries a non-monomial result produced
/// by merging exponentials.
fn prod_mul(a: &Prod, b: &Prod) -> Result<std::result::Result<Prod, Rat>> {
    let mut factors = a.factors.clone();
    for (f, k) in &b.factors {
        *factors.entry(f.clone()).or_insert(0) += k;
    }
    let exp = match (&a.exp, &b.exp) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (Some(x), Some(y)) => {
            let sum = add(&norm(x)?, &norm(y)?)?;
            let (rest, powers) = split_exp(&sum)?;
            let base = Prod { factors, exp: rest.map(|r| Box::new(to_expr(&r))) };
            return Ok(match powers {
                None => Ok(base),
                Some(p) => Err(mul(&Rat::prod(base), &p)?),
            });
        }
    };
    Ok(Ok(Prod { factors, exp }))
}

/// Splits an exponent into the part that stays inside `exp` and the
/// product of powers released by integer multiples of logarithms.
fn split_exp(a: &Rat) -> Result<(Option<Rat>, Option<Rat>)> {
    if a.is_zero() {
        return Ok((None, None));
    }
    if !a.is_poly() {
        return Ok((Some(a.clone()), None));
    }
    let mut rest = Poly::new();
    let mut powers: Option<Rat> = None;
    for (m, c) in &a.num {
        if m.exp.is_none() && m.factors.len() == 1 && c.is_integer() {
            if let Some((Factor::Ln(arg), 1)) = m.factors.iter().next() {
                let k = c.to_integer().to_i64().filter(|k| k.abs() <= MAX_INT_POWER);
                if let Some(k) = k {
                    let p = pow_int(&norm(arg)?, k)?;
                    powers = Some(match powers {
                        None => p,
                        Some(acc) => mul(&acc, &p)?,
                    });
                    continue;
                }
            }
        }
        poly_add_term(&mut rest, m.clone(), c.clone());
    }
    let rest = (!rest.is_empty()).then(|| Rat::from_poly(rest));
    Ok((rest, powers))
}

fn exp(a: &Rat) -> Result<Rat> {
    let (rest, powers) = split_exp(a)?;
    let base = match rest {
        None => Rat::constant(Q::one()),
        Some(r) => Rat::prod(Prod { factors: BTreeMap::new(), exp: Some(Box::new(to_expr(&r))) }),
    };
    match powers {
        None => Ok(base),
        Some(p) => mul(&base, &p),
    }
}

fn ln(a: &Rat) -> Result<Rat> {
    if a.is_zero() {
        return Err(Error::Domain("ln(0)".into()));
    }
    if let Some(v) = a.as_const() {
        if v.is_one() {
            return Ok(Rat::constant(Q::zero()));
        }
        if v.is_negative() {
            return Err(Error::Domain(format!("ln({v})")));
        }
    }
    // ln(c * P * e^S) = ln(c * P) + S
    if a.is_poly() && a.num.len() == 1 {
        let (m, c) = a.num.iter().next().unwrap();
        if let Some(s) = &m.exp {
            let rest = Rat::prod(Prod { factors: m.factors.clone(), exp: None });
            let rest = Rat { num: poly_scale(&rest.num, c), den: rest.den };
            let s = norm(s)?;
            if rest.as_const().is_some_and(|v| v.is_one()) {
                return Ok(s);
            }
            return add(&ln(&rest)?, &s);
        }
    }
    Ok(Rat::prod(Prod::factor(Factor::Ln(Box::new(to_expr(a))))))
}

fn pow_int(b: &Rat, k: i64) -> Result<Rat> {
    if k.abs() > MAX_INT_POWER {
        return Err(Error::Domain(format!("integer exponent {k} too large")));
    }
    if k == 0 {
        if b.is_zero() {
            return Err(Error::Domain("0^0".into()));
        }
        return Ok(Rat::constant(Q::one()));
    }
    if k < 0 {
        return inv(&pow_int(b, -k)?);
    }
    let mut acc = Rat::constant(Q::one());
    let mut base = b.clone();
    let mut k = k as u64;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul(&acc, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = mul(&base, &base)?;
        }
    }
    Ok(acc)
}

fn pow(b: &Rat, x: &Rat) -> Result<Rat> {
    if let Some(k) = x.as_const() {
        if k.is_integer() {
            let k = k.to_integer().to_i64().ok_or_else(|| Error::Domain("integer exponent too large".into()))?;
            return pow_int(b, k);
        }
    }
    if x.is_zero() {
        return Ok(Rat::constant(Q::one()));
    }
    if let Some(v) = b.as_const() {
        if v.is_zero() {
            if x.as_const().is_some_and(|k| k.is_positive()) {
                return Ok(Rat::constant(Q::zero()));
            }
            return Err(Error::Domain("0 raised to a non-constant power".into()));
        }
        if v.is_negative() {
            return Err(Error::Domain(format!("negative base {v} with non-integer exponent")));
        }
    }
    exp(&mul(x, &ln(b)?)?)
}

fn fact(a: &Rat) -> Result<Rat> {
    if let Some(v) = a.as_const() {
        if v.is_integer() && !v.is_negative() && v <= q(1000) {
            let n = v.to_integer().to_u64().unwrap();
            let mut acc = BigInt::one();
            for i in 2..=n {
                acc *= i;
            }
            return Ok(Rat::constant(Q::from_integer(acc)));
        }
    }
    let ok = a.is_poly()
        && a.num
            .iter()
            .all(|(m, c)| m.is_one() || (m.exp.is_none() && m.factors.len() == 1 && m.var_degree() == 1 && c.is_one()))
        && a.num.keys().any(|m| m.var_degree() == 1);
    if !ok {
        return Err(Error::FactorialDomain(super::print(&to_expr(a), "x", super::Format::Plain)));
    }
    Ok(Rat::prod(Prod::factor(Factor::Fact(Box::new(to_expr(a))))))
}

/// Brings `num / den` to canonical form.
fn simplify(mut num: Poly, mut den: Poly) -> Result<Rat> {
    if num.is_empty() {
        return Ok(Rat::constant(Q::zero()));
    }
    if den.is_empty() {
        return Err(Error::DivisionByExactZero);
    }
    if let Some(c) = poly_as_const(&den) {
        return Ok(Rat::from_poly(poly_scale(&num, &c.recip())));
    }
    // a common exponential in the denominator moves up, negated
    let first_exp = den.keys().next().unwrap().exp.clone();
    if let Some(s) = first_exp {
        if den.keys().all(|m| m.exp.as_ref() == Some(&s)) {
            den = den.into_iter().map(|(m, c)| (Prod { factors: m.factors, exp: None }, c)).collect();
            let neg = exp(&norm(&s)?.neg())?;
            let moved = mul(&Rat::from_poly(num), &neg)?;
            return div(&moved, &Rat::from_poly(den));
        }
    }
    // common factor monomial
    let mut common: BTreeMap<Factor, u32> = den.keys().next().unwrap().factors.clone();
    for m in num.keys().chain(den.keys()) {
        common = common
            .into_iter()
            .filter_map(|(f, k)| {
                let e = m.factors.get(&f).copied().unwrap_or(0).min(k);
                (e > 0).then_some((f, e))
            })
            .collect();
    }
    if !common.is_empty() {
        let strip = |p: Poly| -> Poly {
            p.into_iter()
                .map(|(mut m, c)| {
                    for (f, k) in &common {
                        let e = m.factors.get_mut(f).unwrap();
                        *e -= k;
                        if *e == 0 {
                            m.factors.remove(f);
                        }
                    }
                    (m, c)
                })
                .collect()
        };
        num = strip(num);
        den = strip(den);
        if let Some(c) = poly_as_const(&den) {
            return Ok(Rat::from_poly(poly_scale(&num, &c.recip())));
        }
    }
    // integer content and sign
    let mut l = BigInt::one();
    for c in num.values().chain(den.values()) {
        l = l.lcm(c.denom());
    }
    let mut g = BigInt::zero();
    for c in num.values().chain(den.values()) {
        g = g.gcd(&(c.numer() * &l / c.denom()));
    }
    let mut k = Q::new(l, g);
    if ordered_terms(&den)[0].1.is_negative() {
        k = -k;
    }
    num = poly_scale(&num, &k);
    den = poly_scale(&den, &k);
    // num proportional to den
    let (lm, lc) = den.iter().next().unwrap();
    if let Some(nc) = num.get(lm) {
        let r = nc / lc;
        if poly_scale(&den, &r) == num {
            return Ok(Rat::constant(r));
        }
    }
    Ok(Rat { num, den })
}

/// Display order: descending degree in the main variable, constants last.
fn ordered_terms(p: &Poly) -> Vec<(&Prod, &Q)> {
    let mut v: Vec<(&Prod, &Q)> = p.iter().collect();
    v.sort_by(|a, b| a.0.is_one().cmp(&b.0.is_one()).then(b.0.var_degree().cmp(&a.0.var_degree())).then(a.0.cmp(b.0)));
    v
}

fn factor_expr(f: &Factor) -> Expr {
    match f {
        Factor::Param(p) => Expr::Param(p.clone()),
        Factor::Var => Expr::Var,
        Factor::Ln(a) => Expr::Ln(a.clone()),
        Factor::Fact(a) => Expr::Fact(a.clone()),
    }
}

fn term_expr(m: &Prod, c: &Q) -> Expr {
    if m.is_one() {
        return Expr::Const(c.clone());
    }
    let mut fs = Vec::new();
    if !c.abs().is_one() {
        fs.push(Expr::Const(c.abs()));
    }
    for (f, k) in &m.factors {
        for _ in 0..*k {
            fs.push(factor_expr(f));
        }
    }
    if let Some(s) = &m.exp {
        fs.push(Expr::Exp(s.clone()));
    }
    let body = if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Mul(fs) };
    if c.is_negative() {
        Expr::Neg(Box::new(body))
    } else {
        body
    }
}

fn poly_expr(p: &Poly) -> Expr {
    let mut terms: Vec<Expr> = ordered_terms(p).into_iter().map(|(m, c)| term_expr(m, c)).collect();
    match terms.len() {
        0 => Expr::int(0),
        1 => terms.pop().unwrap(),
        _ => Expr::Add(terms),
    }
}

fn to_expr(r: &Rat) -> Expr {
    let n = poly_expr(&r.num);
    if r.is_poly() {
        n
    } else {
        Expr::Div(Box::new(n), Box::new(poly_expr(&r.den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::q2;
    use crate::expr::parse;

    fn n(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn division_shape_is_kept() {
        let e = n("(3*n+5)/(5*n)");
        let want = Expr::Div(
            Box::new(Expr::Add(vec![Expr::Mul(vec![Expr::int(3), Expr::Var]), Expr::int(5)])),
            Box::new(Expr::Mul(vec![Expr::int(5), Expr::Var])),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn powers_desugar_through_exp_and_ln() {
        let e = crate::expr::Context::new().with_params(["a"]).parse("x^a").unwrap().expr;
        assert_eq!(e, Expr::Exp(Box::new(Expr::Mul(vec![Expr::param("a"), Expr::Var.ln()]))));
        assert_eq!(n("fact(n)*e^n"), Expr::Mul(vec![Expr::Var.fact(), Expr::Var.exp()]));
    }

    #[test]
    fn exponentials_merge_and_release_powers() {
        assert_eq!(n("x^(1/2)*x^(1/2)"), Expr::Var);
        assert_eq!(n("exp(2*ln(x) + x)"), n("x^2*e^x"));
        assert_eq!(n("ln(exp(x))"), Expr::Var);
        assert_eq!(n("exp(ln(x+1))"), n("x+1"));
        assert_eq!(n("e^x/e^x"), Expr::int(1));
        assert_eq!(n("1/e^x"), n("e^(-x)"));
        assert_eq!(n("ln(x*e^x)"), n("ln(x) + x"));
    }

    #[test]
    fn cancellation() {
        assert_eq!(n("(6*x)/(3*x)"), Expr::int(2));
        assert_eq!(n("(x+1)/(2*x+2)"), Expr::Const(q2(1, 2)));
        assert_eq!(n("x - x"), Expr::int(0));
        assert_eq!(n("(x^2 - 1)/(x - 1)").to_string(), "(x^2 - 1)/(x - 1)");
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(parse("(-2)^(1/2)"), Err(Error::Domain(_))));
        assert!(matches!(parse("ln(0)"), Err(Error::Domain(_))));
        assert!(matches!(parse("1/(x-x)"), Err(Error::DivisionByExactZero)));
        assert!(matches!(parse("fact(2*n)"), Err(Error::FactorialDomain(_))));
        assert!(matches!(parse("fact(ln(n))"), Err(Error::FactorialDomain(_))));
        assert_eq!(n("fact(n+1)").to_string(), "fact(x + 1)");
        assert_eq!(n("fact(5)"), Expr::int(120));
    }

    #[test]
    fn integer_powers_of_sums_expand() {
        assert_eq!(n("(x+1)^2").to_string(), "x^2 + 2*x + 1");
        assert_eq!(n("(x+1)^-1").to_string(), "1/(x + 1)");
    }
}
