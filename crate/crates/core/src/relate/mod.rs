//! Magnitude and order relations between expressions at a point.

mod chain;
mod table;

use std::fmt;

use crate::assume::Assumptions;
use crate::coeff::{Coeff, Sign, SignOracle};
use crate::error::{Error, Result};
use crate::expr::{print, Expr, Format};
use crate::gnum::{self, default_order, ExtendedReal};
use crate::point::Point;
use crate::scale::{cmp_one, Monomial};

pub use chain::{parse_chain, verify_chain, Chain, ChainReport, ChainStep, Justification, StepReport, StepStatus};
pub use table::{apply_rel_op, implies, RelCtx, RelOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    MuchLess,
    PrecEq,
    Propto,
    Sim,
    SimEq,
    SuccEq,
    MuchGreater,
    Less,
    LessEq,
    Equal,
    GreaterEq,
    Greater,
    LogMuchLess,
    LogMuchGreater,
}

impl Relation {
    pub const ALL: [Relation; 14] = [
        Relation::MuchLess,
        Relation::PrecEq,
        Relation::Propto,
        Relation::Sim,
        Relation::SimEq,
        Relation::SuccEq,
        Relation::MuchGreater,
        Relation::Less,
        Relation::LessEq,
        Relation::Equal,
        Relation::GreaterEq,
        Relation::Greater,
        Relation::LogMuchLess,
        Relation::LogMuchGreater,
    ];

    /// The relation seen with the sides swapped.
    pub fn reverse(self) -> Relation {
        use Relation::*;
        match self {
            MuchLess => MuchGreater,
            MuchGreater => MuchLess,
            PrecEq => SuccEq,
            SuccEq => PrecEq,
            Less => Greater,
            Greater => Less,
            LessEq => GreaterEq,
            GreaterEq => LessEq,
            LogMuchLess => LogMuchGreater,
            LogMuchGreater => LogMuchLess,
            r => r,
        }
    }

    pub fn token(self) -> &'static str {
        use Relation::*;
        match self {
            MuchLess => "prec",
            PrecEq => "preceq",
            Propto => "propto",
            Sim => "sim",
            SimEq => "simeq",
            SuccEq => "succeq",
            MuchGreater => "succ",
            Less => "lt",
            LessEq => "le",
            Equal => "eq",
            GreaterEq => "ge",
            Greater => "gt",
            LogMuchLess => "logll",
            LogMuchGreater => "loggg",
        }
    }

    pub fn symbol(self) -> &'static str {
        use Relation::*;
        match self {
            MuchLess => "≺",
            PrecEq => "⪯",
            Propto => "∝",
            Sim => "∼",
            SimEq => "≃",
            SuccEq => "⪰",
            MuchGreater => "≻",
            Less => "<",
            LessEq => "≤",
            Equal => "=",
            GreaterEq => "≥",
            Greater => ">",
            LogMuchLess => "≺≺",
            LogMuchGreater => "≻≻",
        }
    }

    pub fn from_token(s: &str) -> Option<Relation> {
        Relation::ALL.into_iter().find(|r| r.token() == s)
    }

    /// `<`, `<=`, `=`, `>=`, `>`.
    pub fn is_order(self) -> bool {
        use Relation::*;
        matches!(self, Less | LessEq | Equal | GreaterEq | Greater)
    }

    /// Relations that only depend on growth classes.
    pub fn is_magnitude(self) -> bool {
        use Relation::*;
        matches!(self, MuchLess | PrecEq | Propto | Sim | SuccEq | MuchGreater)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Sign of `f - g` at the point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Less,
    Greater,
    Equal,
    Unknown,
}

impl Order {
    pub fn token(self) -> &'static str {
        match self {
            Order::Less => "lt",
            Order::Greater => "gt",
            Order::Equal => "eq",
            Order::Unknown => "unknown",
        }
    }

    pub fn reverse(self) -> Order {
        match self {
            Order::Less => Order::Greater,
            Order::Greater => Order::Less,
            o => o,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationResult {
    /// One of `MuchLess`, `Propto`, `MuchGreater`.
    pub magnitude: Relation,
    /// `f/g -> 1`.
    pub asymptotic: bool,
    /// `f - g` is infinitesimal or exactly zero.
    pub close: bool,
    pub order: Order,
    pub landau: String,
}

impl RelationResult {
    /// The most specific relation token: `sim` when asymptotic, else the
    /// magnitude.
    pub fn verdict(&self) -> Relation {
        if self.asymptotic {
            Relation::Sim
        } else {
            self.magnitude
        }
    }

    pub fn landau_with(&self, f: &str, g: &str) -> String {
        landau(self.magnitude, self.asymptotic, f, g)
    }

    /// Whether `rel` holds according to this result. Log-dominance is not
    /// decided here and always reports `false`.
    pub fn satisfies(&self, rel: Relation) -> bool {
        use Relation::*;
        match rel {
            MuchLess => self.magnitude == MuchLess,
            PrecEq => self.magnitude != MuchGreater,
            Propto => self.magnitude == Propto,
            Sim => self.asymptotic,
            SimEq => self.close,
            SuccEq => self.magnitude != MuchLess,
            MuchGreater => self.magnitude == MuchGreater,
            Less => self.order == Order::Less,
            LessEq => matches!(self.order, Order::Less | Order::Equal),
            Equal => self.order == Order::Equal,
            GreaterEq => matches!(self.order, Order::Greater | Order::Equal),
            Greater => self.order == Order::Greater,
            LogMuchLess | LogMuchGreater => false,
        }
    }

    pub fn reversed(&self) -> RelationResult {
        RelationResult {
            magnitude: self.magnitude.reverse(),
            asymptotic: self.asymptotic,
            close: self.close,
            order: self.order.reverse(),
            landau: self.landau.clone(),
        }
    }
}

fn landau(magnitude: Relation, asymptotic: bool, f: &str, g: &str) -> String {
    match magnitude {
        Relation::MuchLess => format!("{f} = o({g})"),
        Relation::MuchGreater => format!("{g} = o({f})"),
        _ if asymptotic => format!("{f} ~ {g}"),
        _ => format!("{f} = Theta({g})"),
    }
}

fn is_zero_expr(e: &Expr) -> Result<bool> {
    Ok(e.normalize()?.is_zero())
}

/// Compares `f` and `g` at `p`.
pub fn compare(f: &Expr, g: &Expr, p: &Point, a: &Assumptions) -> Result<RelationResult> {
    compare_with_order(f, g, p, a, default_order())
}

pub fn compare_with_order(f: &Expr, g: &Expr, p: &Point, a: &Assumptions, order: usize) -> Result<RelationResult> {
    if is_zero_expr(g)? {
        return Err(Error::DivisionByExactZero);
    }
    let ratio = gnum::expand(&(f.clone() / g.clone()), p, a, order)?;
    let (magnitude, asymptotic) = match ratio.lead() {
        None => (Relation::MuchLess, false),
        Some((c, m)) => match cmp_one(m, ratio.assumptions())? {
            std::cmp::Ordering::Less => (Relation::MuchLess, false),
            std::cmp::Ordering::Greater => (Relation::MuchGreater, false),
            std::cmp::Ordering::Equal => {
                let one = a.sign(&c.sub(&Coeff::one())) == Sign::Zero;
                (Relation::Propto, one)
            }
        },
    };
    let diff = gnum::expand(&(f.clone() - g.clone()), p, a, order)?;
    let close = match diff.lead() {
        None => true,
        Some((_, m)) => cmp_one(m, diff.assumptions())? == std::cmp::Ordering::Less,
    };
    let order = match gnum::sign_leading(&diff)? {
        Sign::Positive => Order::Greater,
        Sign::Negative => Order::Less,
        Sign::Zero => Order::Equal,
        Sign::Unknown => Order::Unknown,
    };
    let fs = print(&f.normalize()?, "x", Format::Plain);
    let gs = print(&g.normalize()?, "x", Format::Plain);
    Ok(RelationResult { magnitude, asymptotic, close, order, landau: landau(magnitude, asymptotic, &fs, &gs) })
}

/// `f` log-dominates `g`: `ln f` is much greater than `ln g`.
pub fn logdom(f: &Expr, g: &Expr, p: &Point, a: &Assumptions) -> Result<bool> {
    let lf = f.clone().ln();
    let lg = g.clone().ln();
    if is_zero_expr(&lf)? {
        return Ok(false);
    }
    if is_zero_expr(&lg)? {
        return Ok(true);
    }
    Ok(compare(&lf, &lg, p, a)?.magnitude == Relation::MuchGreater)
}

/// Whether `f rel g` holds at `p`, log-dominance included.
pub fn relation_holds(rel: Relation, f: &Expr, g: &Expr, p: &Point, a: &Assumptions) -> Result<bool> {
    match rel {
        Relation::LogMuchGreater => logdom(f, g, p, a),
        Relation::LogMuchLess => logdom(g, f, p, a),
        r => Ok(compare(f, g, p, a)?.satisfies(r)),
    }
}

/// Standard part of `e` at `p`.
pub(crate) fn st_at(e: &Expr, p: &Point, a: &Assumptions) -> Result<ExtendedReal> {
    gnum::st(&gnum::expand(e, p, a, default_order())?)
}

pub(crate) fn sign_at(e: &Expr, p: &Point, a: &Assumptions) -> Result<Sign> {
    gnum::sign_leading(&gnum::expand(e, p, a, default_order())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Monotone {
    Increasing,
    Decreasing,
    Constant,
}

impl fmt::Display for Monotone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotone::Increasing => "increasing",
            Monotone::Decreasing => "decreasing",
            Monotone::Constant => "constant",
        })
    }
}

/// Tail behaviour of the sequence `a(n)` from the sign of `a(n+1) - a(n)`.
pub fn is_monotone_tail(term: &Expr, a: &Assumptions) -> Result<Monotone> {
    let next = term.substitute(&(Expr::Var + Expr::int(1)))?;
    let diff = (next - term.clone()).normalize()?;
    if diff.is_zero() {
        return Ok(Monotone::Constant);
    }
    let g = gnum::expand(&diff, &Point::Infinity, a, default_order())?;
    match gnum::sign_leading(&g)? {
        Sign::Positive => Ok(Monotone::Increasing),
        Sign::Negative => Ok(Monotone::Decreasing),
        Sign::Zero => Ok(Monotone::Constant),
        // name the leading coefficient, which is what blocks the decision
        Sign::Unknown => match g.lead() {
            Some((c, _)) => Err(Error::assumption(c)),
            None => Err(Error::assumption(print(&diff, "n", Format::Plain))),
        },
    }
}

/// Leading monomial of `e` at infinity, used for ranking.
#[allow(dead_code)]
pub(crate) fn lead_monomial(e: &Expr, a: &Assumptions) -> Result<Option<Monomial>> {
    let g = gnum::expand(e, &Point::Infinity, a, default_order())?;
    Ok(g.lead().map(|t| t.1.clone()))
}
