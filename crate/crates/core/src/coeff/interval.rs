//! Rigorous rational interval enclosures of parameter-free coefficients.
//!
//! Every endpoint is a dyadic rational rounded outward, so enclosures are
//! guaranteed to contain the true value. Used only to decide signs.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{q, q2, Atom, Coeff, Mono, Poly, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

fn floor_dyadic(v: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits;
    let n = (v * Q::from_integer(scale.clone())).floor().to_integer();
    Q::new(n, scale)
}

fn ceil_dyadic(v: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits;
    let n = (v * Q::from_integer(scale.clone())).ceil().to_integer();
    Q::new(n, scale)
}

impl Interval {
    pub fn point(v: Q) -> Interval {
        Interval { lo: v.clone(), hi: v }
    }

    fn round(self, bits: u32) -> Interval {
        Interval { lo: floor_dyadic(&self.lo, bits), hi: ceil_dyadic(&self.hi, bits) }
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    fn recip(&self) -> Option<Interval> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    fn powi(&self, k: i32, bits: u32) -> Option<Interval> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut acc = Interval::point(Q::one());
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base).round(bits);
        }
        Some(acc)
    }
}

/// Enclosure of `2 * atanh(y)` for rational `0 <= y <= 1/3`.
fn two_atanh(y: &Q, bits: u32) -> Interval {
    let wp = bits + 16;
    let y2 = y * y;
    let mut pow = y.clone();
    let mut lo = Q::zero();
    let mut hi = Q::zero();
    let mut k = 1i64;
    let eps = Q::new(BigInt::one(), BigInt::one() << (bits + 8));
    loop {
        let t = &pow / q(k);
        lo += floor_dyadic(&t, wp);
        hi += ceil_dyadic(&t, wp);
        pow = ceil_dyadic(&(&pow * &y2), wp + 8).max(Q::zero());
        k += 2;
        // tail bound: y^k / (k (1 - y^2)) with y^2 <= 1/9
        let tail = &pow * q2(9, 8) / q(k);
        if tail < eps {
            hi += tail;
            break;
        }
    }
    Interval { lo: lo * q(2), hi: hi * q(2) }
}

fn ln2(bits: u32) -> Interval {
    two_atanh(&q2(1, 3), bits)
}

/// Enclosure of `ln(v)` for rational `v > 0`.
fn ln_point(v: &Q, bits: u32) -> Interval {
    // v = 2^k * m with m in [1, 2)
    let nb = v.numer().bits() as i64;
    let db = v.denom().bits() as i64;
    let mut k = nb - db;
    let mut m = if k >= 0 {
        v / Q::from_integer(BigInt::one() << k as usize)
    } else {
        v * Q::from_integer(BigInt::one() << (-k) as usize)
    };
    while m >= q(2) {
        m /= q(2);
        k += 1;
    }
    while m < q(1) {
        m *= q(2);
        k -= 1;
    }
    let y = (&m - q(1)) / (&m + q(1));
    // round y outward; atanh is increasing
    let ylo = floor_dyadic(&y, bits + 16).max(Q::zero());
    let yhi = ceil_dyadic(&y, bits + 16);
    let a = two_atanh(&ylo, bits);
    let b = two_atanh(&yhi, bits);
    let base = Interval { lo: a.lo, hi: b.hi };
    let l2 = ln2(bits + 8);
    let kk = Interval::point(q(k));
    base.add(&kk.mul(&l2)).round(bits + 4)
}

/// Enclosure of `exp(v)` for rational `v`.
fn exp_point(v: &Q, bits: u32) -> Option<Interval> {
    if v.abs() > q(4096) {
        return None;
    }
    if v.is_negative() {
        return exp_point(&-v, bits)?.recip().map(|i| i.round(bits));
    }
    // s = v / 2^r <= 1/2
    let mut r = 0u32;
    let mut s = v.clone();
    while s > q2(1, 2) {
        s /= q(2);
        r += 1;
    }
    let wp = bits + 2 * r + 24;
    let mut lo = Q::zero();
    let mut hi = Q::zero();
    let mut term = Q::one();
    let mut n = 0i64;
    let eps = Q::new(BigInt::one(), BigInt::one() << (wp + 4));
    loop {
        lo += floor_dyadic(&term, wp);
        hi += ceil_dyadic(&term, wp);
        n += 1;
        term = ceil_dyadic(&(&term * &s / q(n)), wp + 8);
        // remainder after the current partial sum is at most 2 * term
        if term < eps {
            hi += &term * q(2);
            break;
        }
    }
    let mut iv = Interval { lo, hi };
    for _ in 0..r {
        iv = iv.mul(&iv).round(wp);
    }
    Some(iv.round(bits + 4))
}

fn atan_recip(n: i64, bits: u32) -> Interval {
    // alternating series: partial sums bracket the value
    let x = q2(1, n);
    let x2 = &x * &x;
    let mut sum = Q::zero();
    let mut pow = x;
    let mut k = 1i64;
    let mut sign = 1i64;
    let eps = Q::new(BigInt::one(), BigInt::one() << (bits + 8));
    loop {
        let t = &pow / q(k);
        if t < eps {
            let other = &sum + q(sign) * &t;
            let (lo, hi) = if sum < other { (sum, other) } else { (other, sum) };
            return Interval { lo, hi };
        }
        sum += q(sign) * t;
        pow *= &x2;
        k += 2;
        sign = -sign;
    }
}

fn pi(bits: u32) -> Interval {
    let a = atan_recip(5, bits + 8);
    let b = atan_recip(239, bits + 8);
    a.mul(&Interval::point(q(16))).add(&b.mul(&Interval::point(q(-4)))).round(bits + 4)
}

fn ln_interval(iv: &Interval, bits: u32) -> Option<Interval> {
    if !iv.lo.is_positive() {
        return None;
    }
    Some(Interval { lo: ln_point(&iv.lo, bits).lo, hi: ln_point(&iv.hi, bits).hi })
}

fn exp_interval(iv: &Interval, bits: u32) -> Option<Interval> {
    Some(Interval { lo: exp_point(&iv.lo, bits)?.lo, hi: exp_point(&iv.hi, bits)?.hi })
}

fn atom(a: &Atom, bits: u32) -> Option<Interval> {
    match a {
        Atom::Param(_) => None,
        Atom::Ln(p) => ln_interval(&poly(p, bits)?, bits),
        Atom::Exp(c) => exp_interval(&enclose(c, bits)?, bits),
        Atom::Ln2Pi => {
            let two_pi = pi(bits + 8).mul(&Interval::point(q(2)));
            ln_interval(&two_pi, bits)
        }
    }
}

fn mono(m: &Mono, bits: u32) -> Option<Interval> {
    let mut acc = Interval::point(Q::one());
    for (a, e) in m.atoms() {
        acc = acc.mul(&atom(a, bits + 8)?.powi(e, bits + 8)?).round(bits + 8);
    }
    Some(acc)
}

fn poly(p: &Poly, bits: u32) -> Option<Interval> {
    let mut acc = Interval::point(Q::zero());
    for (m, c) in p.terms() {
        acc = acc.add(&mono(m, bits + 4)?.mul(&Interval::point(c.clone())));
    }
    Some(acc.round(bits + 4))
}

/// Outward-rounded enclosure of a parameter-free coefficient with roughly
/// `bits` bits of working precision. `None` if parameters occur or a
/// subterm cannot be enclosed (log of a non-positive enclosure, huge
/// exponent).
pub fn enclose(c: &Coeff, bits: u32) -> Option<Interval> {
    let n = poly(c.numer(), bits)?;
    let d = poly(c.denom(), bits)?;
    Some(n.mul(&d.recip()?).round(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn width(i: &Interval) -> f64 {
        (&i.hi - &i.lo).to_f64().unwrap()
    }

    fn mid(i: &Interval) -> f64 {
        ((&i.hi + &i.lo) / q(2)).to_f64().unwrap()
    }

    #[test]
    fn ln_two_and_pi() {
        let l = ln2(80);
        assert!((mid(&l) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(width(&l) < 1e-20);
        let p = pi(80);
        assert!(p.lo < p.hi);
        assert!((mid(&p) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn exp_and_ln_points() {
        let e = exp_point(&q(1), 80).unwrap();
        assert!((mid(&e) - std::f64::consts::E).abs() < 1e-15);
        let e = exp_point(&q(-3), 80).unwrap();
        assert!((mid(&e) - (-3f64).exp()).abs() < 1e-16);
        let l = ln_point(&q2(1, 10), 80);
        assert!((mid(&l) - 0.1f64.ln()).abs() < 1e-15);
        let l = ln_point(&q(1000), 80);
        assert!(l.lo < l.hi && (mid(&l) - 1000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn enclosures_contain_exact_rationals() {
        let v = q2(22, 7);
        let i = enclose(&Coeff::from_q(v.clone()), 40).unwrap();
        assert!(i.lo <= v && v <= i.hi);
    }
}
