//! Cancellation of common factors between numerator and denominator.
//!
//! Polynomials without exponential atoms are mapped to dense exponent
//! vectors and reduced with a recursive primitive remainder sequence.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Atom, Mono, Poly, Q};

/// Integer polynomial over dense exponent vectors.
type MPoly = BTreeMap<Vec<u32>, BigInt>;

/// Skip inputs whose pseudo-remainders would be too costly.
const MAX_TERMS: usize = 64;

fn add_to(out: &mut MPoly, e: Vec<u32>, c: BigInt) {
    if c.is_zero() {
        return;
    }
    match out.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn mul(a: &MPoly, b: &MPoly) -> MPoly {
    let mut out = MPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            add_to(&mut out, e, ca * cb);
        }
    }
    out
}

fn sub(a: &MPoly, b: &MPoly) -> MPoly {
    let mut out = a.clone();
    for (e, c) in b {
        add_to(&mut out, e.clone(), -c);
    }
    out
}

fn one(n: usize) -> MPoly {
    let mut out = MPoly::new();
    out.insert(vec![0; n], BigInt::one());
    out
}

fn is_const(a: &MPoly) -> bool {
    a.len() == 1 && a.keys().next().is_some_and(|e| e.iter().all(|&k| k == 0))
}

fn deg(a: &MPoly, v: usize) -> u32 {
    a.keys().map(|e| e[v]).max().unwrap_or(0)
}

/// Coefficient of `x_v^k`, as a polynomial in the other variables.
fn coeff_of(a: &MPoly, v: usize, k: u32) -> MPoly {
    a.iter()
        .filter(|(e, _)| e[v] == k)
        .map(|(e, c)| {
            let mut e = e.clone();
            e[v] = 0;
            (e, c.clone())
        })
        .collect()
}

fn shift(a: &MPoly, v: usize, k: u32) -> MPoly {
    a.iter()
        .map(|(e, c)| {
            let mut e = e.clone();
            e[v] += k;
            (e, c.clone())
        })
        .collect()
}

/// Integer content, signed like the lexicographic leading coefficient.
fn signed_content(a: &MPoly) -> BigInt {
    let mut g = BigInt::zero();
    for c in a.values() {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    if a.values().next_back().is_some_and(|c| c.is_negative()) {
        -g
    } else {
        g
    }
}

/// Divides out the signed integer content.
fn int_primitive(a: MPoly) -> MPoly {
    let g = signed_content(&a);
    if g.is_zero() || g.is_one() {
        return a;
    }
    a.into_iter().map(|(e, c)| (e, c / &g)).collect()
}

/// `a / b` when `b` divides `a` exactly over the integers, using
/// lexicographic order.
fn div_exact(a: &MPoly, b: &MPoly) -> Option<MPoly> {
    let (lb_e, lb_c) = b.iter().next_back()?;
    let mut r = a.clone();
    let mut q = MPoly::new();
    while let Some((le, lc)) = r.iter().next_back() {
        if le.iter().zip(lb_e).any(|(x, y)| x < y) {
            return None;
        }
        let (c, rem) = lc.div_rem(lb_c);
        if !rem.is_zero() {
            return None;
        }
        let e: Vec<u32> = le.iter().zip(lb_e).map(|(x, y)| x - y).collect();
        let mut t = MPoly::new();
        t.insert(e.clone(), c.clone());
        r = sub(&r, &mul(&t, b));
        add_to(&mut q, e, c);
    }
    Some(q)
}

fn prem(a: &MPoly, b: &MPoly, v: usize) -> MPoly {
    let db = deg(b, v);
    let lb = coeff_of(b, v, db);
    let mut r = a.clone();
    while !r.is_empty() && deg(&r, v) >= db {
        let dr = deg(&r, v);
        let lr = coeff_of(&r, v, dr);
        r = sub(&mul(&r, &lb), &mul(&shift(b, v, dr - db), &lr));
    }
    r
}

fn content(a: &MPoly, v: usize, n: usize) -> MPoly {
    let mut g = MPoly::new();
    for k in 0..=deg(a, v) {
        let c = coeff_of(a, v, k);
        if c.is_empty() {
            continue;
        }
        g = gcd(&g, &c, v + 1, n);
        if is_const(&g) {
            break;
        }
    }
    g
}

fn primitive(a: &MPoly, v: usize, n: usize) -> MPoly {
    let c = content(a, v, n);
    int_primitive(div_exact(a, &c).unwrap_or_else(|| a.clone()))
}

/// Primitive gcd of `a` and `b`, which only involve variables `v..n`.
fn gcd(a: &MPoly, b: &MPoly, v: usize, n: usize) -> MPoly {
    if a.is_empty() {
        return int_primitive(b.clone());
    }
    if b.is_empty() {
        return int_primitive(a.clone());
    }
    if v == n || is_const(a) || is_const(b) {
        return one(n);
    }
    if deg(a, v) == 0 && deg(b, v) == 0 {
        return gcd(a, b, v + 1, n);
    }
    let (pa, pb) = (int_primitive(a.clone()), int_primitive(b.clone()));
    if div_exact(&pa, &pb).is_some() {
        return pb;
    }
    if div_exact(&pb, &pa).is_some() {
        return pa;
    }
    let (ca, cb) = (content(&pa, v, n), content(&pb, v, n));
    let c = gcd(&ca, &cb, v + 1, n);
    let mut p = div_exact(&pa, &ca).unwrap_or(pa);
    let mut q = div_exact(&pb, &cb).unwrap_or(pb);
    if deg(&p, v) < deg(&q, v) {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_empty() {
        if deg(&q, v) == 0 {
            return c;
        }
        let r = prem(&p, &q, v);
        p = q;
        q = if r.is_empty() { r } else { primitive(&r, v, n) };
    }
    int_primitive(mul(&c, &p))
}

/// Splits `p` into a rational factor, a monomial and an integer
/// polynomial with nonnegative exponents.
fn to_dense(p: &Poly, atoms: &[Atom]) -> (Q, Mono, MPoly) {
    let (_, m) = p.content();
    let shifted = p.mul_mono(&m.inv());
    let mut lcm = BigInt::one();
    for c in shifted.0.values() {
        lcm = lcm.lcm(c.denom());
    }
    let dense = shifted
        .terms()
        .map(|(mono, c)| {
            let e = atoms.iter().map(|a| mono.0.get(a).copied().unwrap_or(0) as u32).collect();
            (e, (c * Q::from_integer(lcm.clone())).to_integer())
        })
        .collect();
    (Q::new(BigInt::one(), lcm), m, dense)
}

fn from_dense(d: &MPoly, atoms: &[Atom], k: &Q, m: &Mono) -> Poly {
    let mut out = Poly::zero();
    for (e, c) in d {
        let mono = Mono(atoms.iter().zip(e).filter(|(_, &k)| k > 0).map(|(a, &k)| (a.clone(), k as i32)).collect());
        out.add_term(Q::from_integer(c.clone()) * k, mono);
    }
    out.mul_mono(m)
}

fn shared_atoms(a: &Poly, b: &Poly) -> Option<Vec<Atom>> {
    if a.len() + b.len() > MAX_TERMS {
        return None;
    }
    let mut atoms: Vec<Atom> = a.0.keys().chain(b.0.keys()).flat_map(|m| m.0.keys().cloned()).collect();
    atoms.sort();
    atoms.dedup();
    if atoms.is_empty() || atoms.iter().any(|a| matches!(a, Atom::Exp(_))) {
        return None;
    }
    Some(atoms)
}

/// Greatest common factor of `a` and `b` beyond monomials and rationals.
/// `None` when it is trivial or the inputs are out of reach.
pub(super) fn common(a: &Poly, b: &Poly) -> Option<Poly> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let atoms = shared_atoms(a, b)?;
    let (_, _, da) = to_dense(a, &atoms);
    let (_, _, db) = to_dense(b, &atoms);
    let g = gcd(&da, &db, 0, atoms.len());
    (!is_const(&g)).then(|| from_dense(&g, &atoms, &Q::one(), &Mono::one()))
}

/// `a / b` when the quotient is a Laurent polynomial.
pub(super) fn divide(a: &Poly, b: &Poly) -> Option<Poly> {
    let atoms = shared_atoms(a, b)?;
    let (ka, ma, da) = to_dense(a, &atoms);
    let (kb, mb, db) = to_dense(b, &atoms);
    // with the divisor primitive, a quotient over Q is already integral
    let g = signed_content(&db);
    let q = div_exact(&da, &int_primitive(db))?;
    let k = ka / (kb * Q::from_integer(g));
    Some(from_dense(&q, &atoms, &k, &ma).mul_mono(&mb.inv()))
}

/// Divides `num` and `den` by their greatest common polynomial factor.
pub(super) fn cancel(num: &Poly, den: &Poly) -> Option<(Poly, Poly)> {
    let g = common(num, den)?;
    Some((divide(num, &g)?, divide(den, &g)?))
}
