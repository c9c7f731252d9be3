//! How relations change when both sides go through the same operation.

use std::fmt;

use crate::assume::Assumptions;
use crate::coeff::{Sign, Q};
use crate::error::{Error, Result};
use crate::expr::{print, Expr, Format};
use crate::gnum::ExtendedReal;
use crate::point::Point;

use super::{compare, logdom, sign_at, st_at, Relation};

/// An operation applied to both sides of a relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelOp {
    ApplyExp,
    ApplyLn,
    Differentiate,
    /// Undoes [`RelOp::Differentiate`]; integration constants are ignored.
    Integrate,
    ScalarMul(Q),
    /// Multiplication by a function of the variable.
    MulBy(Expr),
    AddBoth(Expr),
    Reciprocal,
    Negate,
}

impl RelOp {
    /// The transformed side. `Integrate` has no symbolic form here.
    pub fn apply_expr(&self, e: &Expr) -> Result<Expr> {
        let out = match self {
            RelOp::ApplyExp => e.clone().exp(),
            RelOp::ApplyLn => e.clone().ln(),
            RelOp::Differentiate => return e.differentiate(),
            RelOp::Integrate => {
                return Err(Error::UnsupportedRow { rel: "any".into(), op: "int (no antiderivatives)".into() })
            }
            RelOp::ScalarMul(k) => Expr::rat(k.clone()) * e.clone(),
            RelOp::MulBy(h) => h.clone() * e.clone(),
            RelOp::AddBoth(l) => e.clone() + l.clone(),
            RelOp::Reciprocal => Expr::int(1) / e.clone(),
            RelOp::Negate => -e.clone(),
        };
        out.normalize()
    }

    pub fn render(&self, var: &str) -> String {
        match self {
            RelOp::ApplyExp => "exp".into(),
            RelOp::ApplyLn => "ln".into(),
            RelOp::Differentiate => "D".into(),
            RelOp::Integrate => "int".into(),
            RelOp::ScalarMul(k) => format!("mul({k})"),
            RelOp::MulBy(h) => format!("mul({})", print(h, var, Format::Plain)),
            RelOp::AddBoth(l) => format!("add({})", print(l, var, Format::Plain)),
            RelOp::Reciprocal => "recip".into(),
            RelOp::Negate => "neg".into(),
        }
    }
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

/// The two sides and the setting in which a relation holds.
#[derive(Clone, Debug)]
pub struct RelCtx {
    pub f: Expr,
    pub g: Expr,
    pub point: Point,
    pub assume: Assumptions,
}

impl RelCtx {
    pub fn new(f: Expr, g: Expr, point: Point, assume: Assumptions) -> RelCtx {
        RelCtx { f, g, point, assume }
    }

    fn st(&self, e: &Expr) -> Result<ExtendedReal> {
        st_at(e, &self.point, &self.assume)
    }

    fn sign(&self, e: &Expr) -> Result<Sign> {
        sign_at(e, &self.point, &self.assume)
    }

    fn st_diff(&self) -> Result<ExtendedReal> {
        self.st(&(self.g.clone() - self.f.clone()))
    }

    fn both_positive(&self) -> Result<bool> {
        Ok(self.sign(&self.f)? == Sign::Positive && self.sign(&self.g)? == Sign::Positive)
    }

    fn much_less(&self, l: &Expr, e: &Expr) -> Result<bool> {
        if e.normalize()?.is_zero() {
            return Ok(false);
        }
        Ok(compare(l, e, &self.point, &self.assume)?.magnitude == Relation::MuchLess)
    }
}

fn violated(what: &str) -> Error {
    Error::ConditionViolated(what.to_string())
}

fn unsupported(rel: Relation, op: &RelOp) -> Error {
    Error::UnsupportedRow { rel: rel.token().to_string(), op: op.to_string() }
}

fn is_infinite(v: &ExtendedReal) -> bool {
    !matches!(v, ExtendedReal::Finite(_))
}

fn is_zero(v: &ExtendedReal) -> bool {
    matches!(v, ExtendedReal::Finite(c) if c.is_zero())
}

fn invert_order(rel: Relation) -> Relation {
    use Relation::*;
    match rel {
        Less | LessEq | Greater | GreaterEq => rel.reverse(),
        r => r,
    }
}

/// The relation between `op(f)` and `op(g)` given `f rel g`. Side
/// conditions are checked on `ctx` with the engine.
pub fn apply_rel_op(rel: Relation, op: &RelOp, ctx: &RelCtx) -> Result<Relation> {
    use Relation::*;
    match op {
        RelOp::ApplyExp => apply_exp(rel, ctx),
        RelOp::ApplyLn => apply_ln(rel, ctx),
        RelOp::Differentiate => differentiate(rel, ctx),
        RelOp::Integrate => match rel {
            MuchLess | MuchGreater | Less | LessEq | Equal | GreaterEq | Greater => Ok(rel),
            _ => Err(unsupported(rel, op)),
        },
        RelOp::ScalarMul(k) => {
            if num_traits::Zero::is_zero(k) {
                return Err(violated("scalar must be nonzero"));
            }
            if num_traits::Signed::is_positive(k) {
                return Ok(rel);
            }
            match rel {
                LogMuchLess | LogMuchGreater => Err(unsupported(rel, op)),
                r => Ok(invert_order(r)),
            }
        }
        RelOp::MulBy(h) => mul_by(rel, h, ctx),
        RelOp::AddBoth(l) => match rel {
            Less | LessEq | Equal | GreaterEq | Greater | SimEq => Ok(rel),
            MuchLess | PrecEq | Propto | Sim | SuccEq | MuchGreater => {
                if ctx.much_less(l, &ctx.f)? && ctx.much_less(l, &ctx.g)? {
                    Ok(rel)
                } else {
                    Err(violated("added term must be much less than both sides"))
                }
            }
            _ => Err(unsupported(rel, op)),
        },
        RelOp::Reciprocal => reciprocal(rel, ctx),
        RelOp::Negate => match rel {
            LogMuchLess | LogMuchGreater => Err(unsupported(rel, op)),
            r => Ok(invert_order(r)),
        },
    }
}

fn apply_exp(rel: Relation, ctx: &RelCtx) -> Result<Relation> {
    use ExtendedReal::*;
    use Relation::*;
    let op = RelOp::ApplyExp;
    let (sf, sg) = (ctx.st(&ctx.f)?, ctx.st(&ctx.g)?);
    let lower = matches!(rel, Less | LessEq | MuchLess | PrecEq);
    let upper = matches!(rel, Greater | GreaterEq | MuchGreater | SuccEq);
    if lower && sf == MinusInfinity && sg == PlusInfinity {
        return Ok(MuchLess);
    }
    if upper && sf == PlusInfinity && sg == MinusInfinity {
        return Ok(MuchGreater);
    }
    match rel {
        Equal => Ok(Equal),
        Less | LessEq | MuchLess => match ctx.st_diff()? {
            PlusInfinity => Ok(MuchLess),
            Finite(_) if rel != MuchLess => Ok(rel),
            _ if rel == MuchLess => Err(violated("g - f must tend to +inf")),
            _ => Err(violated("g - f must not tend to -inf")),
        },
        Greater | GreaterEq | MuchGreater => match ctx.st_diff()? {
            MinusInfinity => Ok(MuchGreater),
            Finite(_) if rel != MuchGreater => Ok(rel),
            _ if rel == MuchGreater => Err(violated("f - g must tend to +inf")),
            _ => Err(violated("f - g must not tend to -inf")),
        },
        SimEq => Ok(Sim),
        _ => Err(unsupported(rel, &op)),
    }
}

fn apply_ln(rel: Relation, ctx: &RelCtx) -> Result<Relation> {
    use Relation::*;
    if !ctx.both_positive()? {
        return Err(violated("both sides must be positive"));
    }
    match rel {
        Less | LessEq | Equal | GreaterEq | Greater => Ok(rel),
        MuchLess => Ok(if logdom(&ctx.g, &ctx.f, &ctx.point, &ctx.assume)? { MuchLess } else { Less }),
        MuchGreater => Ok(if logdom(&ctx.f, &ctx.g, &ctx.point, &ctx.assume)? { MuchGreater } else { Greater }),
        LogMuchLess => Ok(MuchLess),
        LogMuchGreater => Ok(MuchGreater),
        Propto => {
            if is_infinite(&ctx.st(&ctx.g.clone().ln())?) {
                Ok(Sim)
            } else {
                Err(violated("ln g must be infinite"))
            }
        }
        Sim => Ok(SimEq),
        SimEq => {
            if is_zero(&ctx.st(&ctx.g)?) {
                Err(violated("g must not tend to 0"))
            } else {
                Ok(SimEq)
            }
        }
        PrecEq | SuccEq => Err(unsupported(rel, &RelOp::ApplyLn)),
    }
}

fn differentiate(rel: Relation, ctx: &RelCtx) -> Result<Relation> {
    use ExtendedReal::*;
    use Relation::*;
    match rel {
        Equal => Ok(Equal),
        MuchLess | PrecEq | Propto | Sim | SuccEq | MuchGreater => {
            if ctx.f.normalize()?.is_zero() || ctx.g.normalize()?.is_zero() {
                return Err(violated("sides must be nonzero"));
            }
            let (sf, sg) = (ctx.st(&ctx.f)?, ctx.st(&ctx.g)?);
            let both_inf = is_infinite(&sf) && is_infinite(&sg);
            let both_zero = is_zero(&sf) && is_zero(&sg);
            if both_inf || both_zero {
                Ok(rel)
            } else {
                Err(violated("f and g must both tend to 0 or both to infinity"))
            }
        }
        Less | LessEq => match ctx.st_diff()? {
            PlusInfinity => Ok(Less),
            _ => Err(violated("g - f must tend to +inf")),
        },
        Greater | GreaterEq => match ctx.st_diff()? {
            MinusInfinity => Ok(Greater),
            _ => Err(violated("f - g must tend to +inf")),
        },
        _ => Err(unsupported(rel, &RelOp::Differentiate)),
    }
}

fn mul_by(rel: Relation, h: &Expr, ctx: &RelCtx) -> Result<Relation> {
    use Relation::*;
    let s = ctx.sign(h)?;
    if s == Sign::Zero {
        return Err(violated("multiplier must be nonzero"));
    }
    match rel {
        MuchLess | PrecEq | Propto | Sim | SuccEq | MuchGreater => Ok(rel),
        SimEq => {
            if is_infinite(&ctx.st(h)?) {
                Err(violated("multiplier must be bounded"))
            } else {
                Ok(SimEq)
            }
        }
        Less | LessEq | Equal | GreaterEq | Greater => match s {
            Sign::Positive => Ok(rel),
            Sign::Negative => Ok(invert_order(rel)),
            _ => Err(violated("multiplier sign must be known")),
        },
        LogMuchLess | LogMuchGreater => Err(unsupported(rel, &RelOp::MulBy(h.clone()))),
    }
}

fn reciprocal(rel: Relation, ctx: &RelCtx) -> Result<Relation> {
    use Relation::*;
    let (a, b) = (ctx.sign(&ctx.f)?, ctx.sign(&ctx.g)?);
    if !a.is_definite() || !b.is_definite() || a == Sign::Zero || b == Sign::Zero {
        return Err(violated("both sides must be nonzero with known sign"));
    }
    match rel {
        Equal | Propto | Sim | LogMuchLess | LogMuchGreater => Ok(rel),
        MuchLess | MuchGreater | PrecEq | SuccEq => Ok(rel.reverse()),
        SimEq => {
            if is_zero(&ctx.st(&ctx.f)?) {
                Err(violated("f must not tend to 0"))
            } else {
                Ok(SimEq)
            }
        }
        Less | LessEq | GreaterEq | Greater => {
            if a == b {
                Ok(rel.reverse())
            } else {
                Err(violated("both sides must have the same sign"))
            }
        }
    }
}

fn static_implies(a: Relation, b: Relation) -> bool {
    use Relation::*;
    let direct: &[Relation] = match a {
        MuchLess => &[PrecEq],
        MuchGreater => &[SuccEq],
        Propto => &[PrecEq, SuccEq],
        Sim => &[Propto, PrecEq, SuccEq],
        Equal => &[LessEq, GreaterEq, SimEq, Sim, Propto, PrecEq, SuccEq],
        Less => &[LessEq],
        Greater => &[GreaterEq],
        _ => &[],
    };
    a == b || direct.contains(&b)
}

/// Whether `f a g` implies `f b g` in `ctx`.
pub fn implies(a: Relation, b: Relation, ctx: &RelCtx) -> Result<bool> {
    use Relation::*;
    if static_implies(a, b) {
        return Ok(true);
    }
    let via = |mid: Relation| static_implies(mid, b);
    match a {
        MuchGreater if matches!(b, Greater | GreaterEq) => Ok(ctx.sign(&ctx.f)? == Sign::Positive),
        MuchLess if matches!(b, Less | LessEq) => Ok(ctx.sign(&ctx.g)? == Sign::Positive),
        SimEq if via(Sim) => Ok(!is_zero(&ctx.st(&ctx.g)?)),
        Sim if b == SimEq => Ok(!is_infinite(&ctx.st(&ctx.g)?)),
        LogMuchLess if via(MuchLess) => Ok(ctx.st(&ctx.g)? == ExtendedReal::PlusInfinity),
        LogMuchGreater if via(MuchGreater) => Ok(ctx.st(&ctx.f)? == ExtendedReal::PlusInfinity),
        _ => Ok(false),
    }
}
