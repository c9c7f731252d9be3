//! Limits from the standard part of an expansion, with L'Hôpital as a
//! cross-check.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed};

use crate::assume::Assumptions;
use crate::coeff::{q, q2, Coeff, Q};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gnum::{self, default_order, ExtendedReal};
use crate::point::Point;

pub const DEFAULT_MAX_ROUNDS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitResult {
    Value(Coeff),
    PlusInfinity,
    MinusInfinity,
    /// Left and right limits at a two-sided point differ.
    TwoSidedMismatch(Box<LimitResult>, Box<LimitResult>),
    Undetermined(Error),
}

impl LimitResult {
    pub fn value(&self) -> Option<&Coeff> {
        match self {
            LimitResult::Value(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_determined(&self) -> bool {
        match self {
            LimitResult::Undetermined(_) => false,
            LimitResult::TwoSidedMismatch(l, r) => l.is_determined() && r.is_determined(),
            _ => true,
        }
    }
}

impl From<ExtendedReal> for LimitResult {
    fn from(v: ExtendedReal) -> LimitResult {
        match v {
            ExtendedReal::Finite(c) => LimitResult::Value(c),
            ExtendedReal::PlusInfinity => LimitResult::PlusInfinity,
            ExtendedReal::MinusInfinity => LimitResult::MinusInfinity,
        }
    }
}

impl fmt::Display for LimitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitResult::Value(c) => write!(f, "{c}"),
            LimitResult::PlusInfinity => f.write_str("+inf"),
            LimitResult::MinusInfinity => f.write_str("-inf"),
            LimitResult::TwoSidedMismatch(l, r) => write!(f, "left {l}, right {r}"),
            LimitResult::Undetermined(e) => write!(f, "undetermined: {e}"),
        }
    }
}

/// Rewrites `e` so that its behaviour at `p` is its behaviour at infinity.
/// The flag reports whether a substitution happened. Two-sided points use
/// the right side.
pub fn shift_point(e: &Expr, p: &Point) -> Result<(Expr, bool)> {
    match p.approach() {
        None => Ok((e.normalize()?, false)),
        Some(x) => {
            if e.contains_fact() {
                return Err(Error::FactorialDomain(format!("{e} cannot be moved away from infinity")));
            }
            Ok((e.substitute(&x)?, true))
        }
    }
}

fn catch(r: Result<LimitResult>) -> Result<LimitResult> {
    match r {
        Err(e) if e.is_undetermined() => Ok(LimitResult::Undetermined(e)),
        other => other,
    }
}

fn one_sided(e: &Expr, p: &Point, a: &Assumptions) -> Result<LimitResult> {
    catch((|| Ok(gnum::st(&gnum::expand(e, p, a, default_order())?)?.into()))())
}

fn per_side(p: &Point, mut f: impl FnMut(&Point) -> Result<LimitResult>) -> Result<LimitResult> {
    let sides = p.sides();
    if sides.len() == 1 {
        return f(&sides[0]);
    }
    let left = f(&sides[0])?;
    let right = f(&sides[1])?;
    if left == right || !left.is_determined() {
        Ok(left)
    } else if !right.is_determined() {
        Ok(right)
    } else {
        Ok(LimitResult::TwoSidedMismatch(Box::new(left), Box::new(right)))
    }
}

/// Limit of `e` at `p`. Undecidable signs and exhausted truncation give
/// [`LimitResult::Undetermined`]; malformed input is an error.
pub fn limit(e: &Expr, p: &Point, a: &Assumptions) -> Result<LimitResult> {
    per_side(p, |s| one_sided(e, s, a))
}

/// Repeatedly differentiates numerator and denominator while the quotient
/// is `0/0` or `inf/inf`. Returns the limit and the number of rounds used.
pub fn lhopital_rounds(
    f: &Expr,
    g: &Expr,
    p: &Point,
    a: &Assumptions,
    max_rounds: usize,
) -> Result<(LimitResult, usize)> {
    let mut used = 0;
    let r = per_side(p, |s| {
        let (r, n) = lhopital_side(f, g, s, a, max_rounds)?;
        used = used.max(n);
        Ok(r)
    });
    r.map(|r| (r, used))
}

fn lhopital_side(f: &Expr, g: &Expr, p: &Point, a: &Assumptions, max_rounds: usize) -> Result<(LimitResult, usize)> {
    let st = |e: &Expr| gnum::st(&gnum::expand(e, p, a, default_order())?);
    let mut f = f.normalize()?;
    let mut g = g.normalize()?;
    for round in 0..=max_rounds {
        let ratio = (f.clone() / g.clone()).normalize()?;
        if !ratio.contains_var() {
            return Ok((one_sided(&ratio, p, a)?, round));
        }
        let (sf, sg) = match (st(&f), st(&g)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(e), _) | (_, Err(e)) if e.is_undetermined() => return Ok((LimitResult::Undetermined(e), round)),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let zero = |v: &ExtendedReal| matches!(v, ExtendedReal::Finite(c) if c.is_zero());
        let infinite = |v: &ExtendedReal| !matches!(v, ExtendedReal::Finite(_));
        if (zero(&sf) && zero(&sg)) || (infinite(&sf) && infinite(&sg)) {
            if round == max_rounds {
                break;
            }
            f = f.differentiate()?;
            g = g.differentiate()?;
            continue;
        }
        if round == 0 && zero(&sg) && !zero(&sf) {
            return Err(Error::NotIndeterminate(format!("{sf}/0")));
        }
        return Ok((one_sided(&ratio, p, a)?, round));
    }
    Ok((LimitResult::Undetermined(Error::RoundsExhausted(max_rounds)), max_rounds))
}

/// Limit of `f/g` at `p` by L'Hôpital's rule.
pub fn limit_lhopital(f: &Expr, g: &Expr, p: &Point, a: &Assumptions, max_rounds: usize) -> Result<LimitResult> {
    lhopital_rounds(f, g, p, a, max_rounds).map(|r| r.0)
}

/// Newton's iteration for `x^2 = 2` from `3/2`:
/// `x <- x + 1/x - x/2`.
pub fn newton_sqrt2_demo(iterations: usize) -> Q {
    let mut x = q2(3, 2);
    for _ in 0..iterations {
        let dx = x.recip() - &x / q(2);
        x += dx;
    }
    x
}

/// Largest `d` such that `x - 10^-d < sqrt(2) < x + 10^-d`.
pub fn sqrt2_digits(x: &Q) -> usize {
    let (n, m) = (x.numer(), x.denom());
    let two_m2 = BigInt::from(2) * m * m;
    let mut s = BigInt::one();
    let mut d: usize = 0;
    loop {
        // (x - 1/s)^2 < 2 < (x + 1/s)^2, scaled by (s m)^2
        let lo = n * &s - m;
        let hi = n * &s + m;
        let target = &two_m2 * &s * &s;
        let holds = !lo.is_negative() && &lo * &lo < target && &hi * &hi > target;
        if !holds {
            return d.saturating_sub(1);
        }
        d += 1;
        s *= 10;
    }
}

/// `x` truncated toward zero to `places` decimal digits.
pub fn decimal(x: &Q, places: usize) -> String {
    let scaled = (x.abs() * Q::from_integer(BigInt::from(10).pow(places as u32))).trunc().to_integer();
    let digits = format!("{:0>width$}", scaled.to_string(), width = places + 1);
    let (int, frac) = digits.split_at(digits.len() - places);
    let sign = if x.is_negative() { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// `sqrt(2)` truncated to `places` digits, from the integer square root of
/// `2 * 10^(2 places)`.
pub fn sqrt2_reference(places: usize) -> String {
    let root = (BigInt::from(2) * BigInt::from(10).pow(2 * places as u32)).sqrt();
    decimal(&Q::new(root, BigInt::from(10).pow(places as u32)), places)
}
