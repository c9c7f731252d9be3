//! Scales of infinity.
//!
//! Expansions happen with the main variable `t -> +inf`. The basis is built
//! from iterated logarithms `ln_k t`, `t` itself and exponentials
//! `exp(m)` of infinitely large monomials `m`. An element is identified by
//! its *class key*, the monomial equal to its logarithm: `ln(ln_k t) =
//! ln_{k+1} t`, `ln t` for `t`, and `m` for `exp(m)`. Two elements compare
//! by comparing their keys, so the order is decided by exponent signs alone.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::assume::Assumptions;
use crate::coeff::{Coeff, Sign, SignOracle};
use crate::error::{Error, Result};
use crate::expr::{print, Expr, Format};
use crate::gnum::{self, Ctx};
use crate::point::Point;
use crate::relate::{self, Relation};

/// Maximum height of exponential towers and logarithm chains.
pub const DEPTH_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    /// `ln_k t` for `k >= 1`.
    Log(u32),
    Var,
    /// `exp(m)` with `m` an infinitely large monomial of unit coefficient.
    Exp(Monomial),
}

/// Product of basis elements raised to coefficient exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Element, Coeff>);

impl Element {
    /// The monomial `ln(self)`.
    pub fn key(&self) -> Monomial {
        match self {
            Element::Log(k) => Monomial::element(Element::Log(k + 1)),
            Element::Var => Monomial::element(Element::Log(1)),
            Element::Exp(m) => m.clone(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Element::Log(k) => *k as usize,
            Element::Var => 0,
            Element::Exp(m) => 1 + m.depth(),
        }
    }

    /// The element `exp(m)`, folding `exp(ln_k t)` back into the log chain.
    pub fn exp_of(m: Monomial) -> Result<Element> {
        if let Some(Element::Log(k)) = m.single_unit() {
            return Ok(if *k == 1 { Element::Var } else { Element::Log(k - 1) });
        }
        let e = Element::Exp(m);
        if e.depth() > DEPTH_LIMIT {
            return Err(Error::DepthLimit(DEPTH_LIMIT));
        }
        Ok(e)
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Element::Log(k) => {
                let mut e = Expr::Var;
                for _ in 0..*k {
                    e = e.ln();
                }
                e
            }
            Element::Var => Expr::Var,
            Element::Exp(m) => m.to_expr().exp(),
        }
    }
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn element(e: Element) -> Monomial {
        Monomial::power(e, Coeff::one())
    }

    pub fn power(e: Element, k: Coeff) -> Monomial {
        let mut m = BTreeMap::new();
        if !k.is_zero() {
            m.insert(e, k);
        }
        Monomial(m)
    }

    pub fn var() -> Monomial {
        Monomial::element(Element::Var)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&Element, &Coeff)> {
        self.0.iter()
    }

    pub fn exponent(&self, e: &Element) -> Coeff {
        self.0.get(e).cloned().unwrap_or_default()
    }

    fn single_unit(&self) -> Option<&Element> {
        match self.0.iter().next() {
            Some((e, k)) if self.0.len() == 1 && k.is_one() => Some(e),
            _ => None,
        }
    }

    pub fn depth(&self) -> usize {
        self.0.keys().map(Element::depth).max().unwrap_or(0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (e, k) in &o.0 {
            let s = out.get(e).map(|v| v.add(k)).unwrap_or_else(|| k.clone());
            if s.is_zero() {
                out.remove(e);
            } else {
                out.insert(e.clone(), s);
            }
        }
        Monomial(out)
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(e, k)| (e.clone(), k.neg())).collect())
    }

    pub fn div(&self, o: &Monomial) -> Monomial {
        self.mul(&o.inv())
    }

    pub fn pow(&self, k: &Coeff) -> Monomial {
        if k.is_zero() {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(e, x)| (e.clone(), x.mul(k))).collect())
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.0.keys()
    }

    /// Every element mentioned, including those inside exponential keys.
    pub fn all_elements(&self, out: &mut BTreeSet<Element>) {
        for e in self.0.keys() {
            if out.insert(e.clone()) {
                if let Element::Exp(m) = e {
                    m.all_elements(out);
                }
            }
        }
    }

    pub fn to_expr(&self) -> Expr {
        let mut fs: Vec<Expr> = Vec::new();
        for (e, k) in &self.0 {
            fs.push(e.to_expr().pow(k.to_expr()));
        }
        match fs.len() {
            0 => Expr::int(1),
            1 => fs.pop().unwrap(),
            _ => Expr::Mul(fs),
        }
    }
}

/// Growth order of basis elements at `t -> inf`.
pub fn cmp_elements(a: &Element, b: &Element, oracle: &Assumptions) -> Result<Ordering> {
    if a == b {
        return Ok(Ordering::Equal);
    }
    match (a, b) {
        (Element::Log(j), Element::Log(k)) => Ok(k.cmp(j)),
        (Element::Var, Element::Log(_)) => Ok(Ordering::Greater),
        (Element::Log(_), Element::Var) => Ok(Ordering::Less),
        _ => cmp_monomials(&a.key(), &b.key(), oracle),
    }
}

/// Fastest-growing element among `elems`.
fn max_element<'a>(elems: impl Iterator<Item = &'a Element>, oracle: &Assumptions) -> Result<Option<&'a Element>> {
    let mut best: Option<&Element> = None;
    for e in elems {
        best = match best {
            None => Some(e),
            Some(b) => {
                if cmp_elements(e, b, oracle)? == Ordering::Greater {
                    Some(e)
                } else {
                    Some(b)
                }
            }
        };
    }
    Ok(best)
}

/// Growth order of monomials: the fastest element whose exponents differ
/// decides, by the sign of the exponent difference.
pub fn cmp_monomials(a: &Monomial, b: &Monomial, oracle: &Assumptions) -> Result<Ordering> {
    if a == b {
        return Ok(Ordering::Equal);
    }
    let mut d = a.div(b);
    loop {
        let Some(top) = max_element(d.elements(), oracle)?.cloned() else {
            return Ok(Ordering::Equal);
        };
        let k = d.exponent(&top);
        match oracle.sign(&k) {
            Sign::Positive => return Ok(Ordering::Greater),
            Sign::Negative => return Ok(Ordering::Less),
            Sign::Zero => {
                d.0.remove(&top);
            }
            Sign::Unknown => return Err(Error::assumption(exponent_text(&k))),
        }
    }
}

fn exponent_text(k: &Coeff) -> String {
    k.to_string()
}

/// Comparison of a monomial with the constant 1.
pub fn cmp_one(m: &Monomial, oracle: &Assumptions) -> Result<Ordering> {
    cmp_monomials(m, &Monomial::one(), oracle)
}

/// An ordered set of comparison classes at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleBasis {
    /// Ascending by growth at the expansion point.
    pub elements: Vec<Element>,
    pub point: Point,
}

impl ScaleBasis {
    pub fn new(point: Point) -> ScaleBasis {
        ScaleBasis { elements: vec![Element::Var], point }
    }

    /// Inserts elements keeping the ascending order; duplicates are ignored.
    pub fn insert(&mut self, e: Element, oracle: &Assumptions) -> Result<()> {
        let mut at = self.elements.len();
        for (i, x) in self.elements.iter().enumerate() {
            match cmp_elements(&e, x, oracle)? {
                Ordering::Equal => return Ok(()),
                Ordering::Less => {
                    at = i;
                    break;
                }
                Ordering::Greater => {}
            }
        }
        self.elements.insert(at, e);
        Ok(())
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.elements.contains(e)
    }
}

/// Growth class of an MRV candidate: the leading monomial of its logarithm.
fn candidate_class(e: &Expr, ctx: &Arc<Ctx>) -> Result<Option<Monomial>> {
    Ok(match e {
        Expr::Var => Some(Element::Var.key()),
        Expr::Fact(_) => Some(Monomial::var().mul(&Monomial::element(Element::Log(1)))),
        Expr::Exp(arg) => {
            let g = gnum::expand::expand_in(arg, ctx)?;
            match g.lead() {
                Some((_, m)) if cmp_one(m, &ctx.assume)? == Ordering::Greater => Some(m.clone()),
                Some(_) => None,
                None if g.is_exhausted() => return Err(Error::NeedMoreTerms),
                None => None,
            }
        }
        _ => None,
    })
}

fn collect_candidates(e: &Expr, out: &mut Vec<Expr>) {
    if matches!(e, Expr::Var | Expr::Exp(_) | Expr::Fact(_)) && !out.contains(e) && e.contains_var() {
        out.push(e.clone());
    }
    for c in e.children() {
        collect_candidates(c, out);
    }
}

/// Most rapidly varying subexpressions of `e` after moving `p` to
/// infinity: the variable, exponentials of infinite arguments and
/// factorials whose growth class is maximal.
pub fn mrv(e: &Expr, p: &Point, a: &Assumptions) -> Result<Vec<Expr>> {
    let prepared = gnum::prepare(e, p, a)?;
    let mut cands = Vec::new();
    collect_candidates(&prepared, &mut cands);
    gnum::with_retry(gnum::default_order(), |t| {
        let ctx = Arc::new(Ctx { order: t, point: Point::Infinity, assume: Arc::new(a.clone()) });
        let mut best: Vec<Expr> = Vec::new();
        let mut best_class: Option<Monomial> = None;
        for c in &cands {
            let Some(class) = candidate_class(c, &ctx)? else {
                continue;
            };
            let ord = match &best_class {
                None => Ordering::Greater,
                Some(b) => cmp_monomials(&class, b, a)?,
            };
            match ord {
                Ordering::Greater => {
                    best = vec![c.clone()];
                    best_class = Some(class);
                }
                Ordering::Equal => best.push(c.clone()),
                Ordering::Less => {}
            }
        }
        Ok(best)
    })
}

/// `b` with the classes needed to expand `e` inserted; elements already
/// present keep their order.
pub fn extend_basis(b: &ScaleBasis, e: &Expr, a: &Assumptions) -> Result<ScaleBasis> {
    let g = gnum::expand(e, &b.point, a, gnum::default_order())?;
    let mut found = BTreeSet::new();
    for (_, m) in g.terms() {
        m.all_elements(&mut found);
    }
    if let Some(m) = g.error() {
        m.all_elements(&mut found);
    }
    let mut chain = BTreeSet::new();
    for el in &found {
        if let Element::Log(k) = el {
            chain.extend((1..*k).map(Element::Log));
        }
    }
    found.extend(chain);
    let mut out = b.clone();
    for el in found {
        if !out.contains(&el) {
            out.insert(el, a)?;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Powers,
    ExpTowers,
    Logs,
    Mixed,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "powers" => Ok(Family::Powers),
            "exp-towers" | "exponential-towers" | "towers" => Ok(Family::ExpTowers),
            "logs" => Ok(Family::Logs),
            "mixed" => Ok(Family::Mixed),
            other => Err(Error::Parse(crate::error::ParseError {
                offset: 0,
                expected: vec!["powers, exp-towers, logs or mixed".into()],
                found: other.into(),
            })),
        }
    }
}

/// Members of a standard scale and the magnitude relation between each
/// adjacent pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scale {
    pub members: Vec<Expr>,
    pub relations: Vec<Relation>,
}

impl Scale {
    pub fn render(&self, var: &str) -> String {
        let mut s = String::new();
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                s.push_str(match self.relations[i - 1] {
                    Relation::MuchLess => " << ",
                    Relation::MuchGreater => " >> ",
                    _ => " propto ",
                });
            }
            s.push_str(&print(m, var, Format::Plain));
        }
        s
    }
}

fn family_members(family: Family, depth: usize, p: &Point) -> Result<Vec<Expr>> {
    let x = Expr::Var;
    Ok(match family {
        Family::Powers => (1..=depth as i64).map(|k| x.clone().powi(k)).collect(),
        Family::ExpTowers => {
            let mut out = Vec::new();
            let mut e = x;
            for _ in 0..depth {
                e = e.exp();
                out.push(e.clone());
            }
            out
        }
        Family::Logs => {
            let a = Assumptions::new();
            let mut out = vec![x.clone()];
            let mut e = x;
            while out.len() < depth {
                // ln of the absolute value keeps the chain real near 0
                let s = relate::sign_at(&e, p, &a)?;
                e = if s == Sign::Negative { (-e).ln() } else { e.ln() };
                out.push(e.clone());
            }
            out
        }
        Family::Mixed => {
            let all = ["1", "ln(x)", "x^(1/2)", "2^x", "fact(x)", "x^x"];
            all.iter()
                .filter(|s| *p == Point::Infinity || !s.contains("fact"))
                .take(depth)
                .map(|s| crate::expr::parse(s))
                .collect::<Result<_>>()?
        }
    })
}

/// The first `depth` members of a standard family with their adjacent
/// relations at `p`.
pub fn standard_scale(family: Family, depth: usize, p: &Point) -> Result<Scale> {
    let a = Assumptions::new();
    let members: Vec<Expr> =
        family_members(family, depth.max(1), p)?.into_iter().map(|e| e.normalize()).collect::<Result<_>>()?;
    let mut relations = Vec::new();
    for w in members.windows(2) {
        relations.push(relate::compare(&w[0], &w[1], p, &a)?.magnitude);
    }
    Ok(Scale { members, relations })
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_expr().normalize() {
            Ok(e) => write!(f, "{e}"),
            Err(_) => write!(f, "{}", self.to_expr()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::q;

    fn a() -> Assumptions {
        Assumptions::new()
    }

    fn ex(m: Monomial) -> Element {
        Element::exp_of(m).unwrap()
    }

    #[test]
    fn log_chain_order() {
        let o = a();
        assert_eq!(cmp_elements(&Element::Log(2), &Element::Log(1), &o).unwrap(), Ordering::Less);
        assert_eq!(cmp_elements(&Element::Var, &Element::Log(1), &o).unwrap(), Ordering::Greater);
        let e_x = ex(Monomial::var());
        assert_eq!(cmp_elements(&e_x, &Element::Var, &o).unwrap(), Ordering::Greater);
    }

    #[test]
    fn exp_of_log_folds() {
        assert_eq!(ex(Monomial::element(Element::Log(1))), Element::Var);
        assert_eq!(ex(Monomial::element(Element::Log(3))), Element::Log(2));
    }

    #[test]
    fn slow_exponentials_sit_below_the_variable() {
        // exp(sqrt(ln t)) grows slower than t
        let m = Monomial::power(Element::Log(1), Coeff::from_q(crate::coeff::q2(1, 2)));
        let e = ex(m);
        assert_eq!(cmp_elements(&e, &Element::Var, &a()).unwrap(), Ordering::Less);
        assert_eq!(cmp_elements(&e, &Element::Log(1), &a()).unwrap(), Ordering::Greater);
    }

    #[test]
    fn monomial_order_uses_fastest_element() {
        let o = a();
        let t = Monomial::var();
        let e_x = Monomial::element(ex(Monomial::var()));
        let big = t.pow(&Coeff::from(100));
        assert_eq!(cmp_monomials(&e_x, &big, &o).unwrap(), Ordering::Greater);
        let m = e_x.mul(&t.pow(&Coeff::from(-5)));
        assert_eq!(cmp_one(&m, &o).unwrap(), Ordering::Greater);
        assert_eq!(cmp_one(&t.inv(), &o).unwrap(), Ordering::Less);
    }

    #[test]
    fn parameter_exponents_need_assumptions() {
        let t_a = Monomial::power(Element::Var, Coeff::param("a"));
        let t = Monomial::var();
        assert_eq!(cmp_one(&t_a, &a()).unwrap(), Ordering::Greater);
        let err = cmp_monomials(&t_a, &t, &a()).unwrap_err();
        assert!(matches!(err, Error::AssumptionNeeded { .. }));
        let o = Assumptions::parse("a > 1").unwrap();
        assert_eq!(cmp_monomials(&t_a, &t, &o).unwrap(), Ordering::Greater);
        assert_eq!(t.pow(&Coeff::from(2)).exponent(&Element::Var), Coeff::from_q(q(2)));
    }

    #[test]
    fn depth_limit() {
        let mut m = Monomial::var();
        let mut result = Ok(Element::Var);
        for _ in 0..=DEPTH_LIMIT {
            result = Element::exp_of(m.clone());
            match &result {
                Ok(e) => m = Monomial::element(e.clone()),
                Err(_) => break,
            }
        }
        assert_eq!(result, Err(Error::DepthLimit(DEPTH_LIMIT)));
    }

    #[test]
    fn basis_insert_keeps_order() {
        let o = a();
        let mut b = ScaleBasis::new(Point::Infinity);
        b.insert(Element::Log(2), &o).unwrap();
        b.insert(Element::Log(1), &o).unwrap();
        b.insert(ex(Monomial::var()), &o).unwrap();
        b.insert(Element::Var, &o).unwrap();
        assert_eq!(b.elements.len(), 4);
        assert_eq!(b.elements[0], Element::Log(2));
        assert_eq!(b.elements[3], ex(Monomial::var()));
    }

    fn px(s: &str) -> Expr {
        crate::expr::parse(s).unwrap()
    }

    #[test]
    fn mrv_sets() {
        let o = a();
        assert_eq!(mrv(&px("exp(x) + x^3"), &Point::Infinity, &o).unwrap(), vec![px("exp(x)")]);
        assert_eq!(mrv(&px("ln(x) + x"), &Point::Infinity, &o).unwrap(), vec![Expr::Var]);
        assert_eq!(mrv(&px("exp(x^2) + exp(x)"), &Point::Infinity, &o).unwrap(), vec![px("exp(x^2)")]);
        assert!(mrv(&px("3"), &Point::Infinity, &o).unwrap().is_empty());
    }

    #[test]
    fn extending_bases() {
        let o = a();
        let b = ScaleBasis::new(Point::Infinity);
        let e = extend_basis(&b, &px("ln(ln(x))"), &o).unwrap();
        assert_eq!(e.elements, vec![Element::Log(2), Element::Log(1), Element::Var]);
        let e = extend_basis(&b, &px("exp(x)"), &o).unwrap();
        assert_eq!(e.elements, vec![Element::Var, ex(Monomial::var())]);
        assert_eq!(extend_basis(&b, &px("x"), &o).unwrap(), b);
    }

    #[test]
    fn standard_scales() {
        let s = standard_scale(Family::Powers, 3, &Point::Infinity).unwrap();
        assert_eq!(s.render("x"), "x << x^2 << x^3");
        let s = standard_scale(Family::Powers, 3, &Point::ZeroPlus).unwrap();
        assert_eq!(s.render("x"), "x >> x^2 >> x^3");
        let s = standard_scale(Family::Logs, 3, &Point::Infinity).unwrap();
        assert_eq!(s.render("x"), "x >> ln(x) >> ln(ln(x))");
        let s = standard_scale(Family::Mixed, 6, &Point::Infinity).unwrap();
        assert!(s.relations.iter().all(|r| *r == Relation::MuchLess), "{}", s.render("x"));
        let s = standard_scale(Family::ExpTowers, 3, &Point::Infinity).unwrap();
        assert_eq!(s.relations, vec![Relation::MuchLess; 2]);
    }
}
