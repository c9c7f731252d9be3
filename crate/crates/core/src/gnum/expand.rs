use std::sync::Arc;

use crate::assume::Assumptions;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::point::Point;
use crate::scale::Monomial;

use super::{stirling, Ctx, GNum};

pub const DEFAULT_ORDER: usize = 8;
pub const RETRY_CAP: usize = 64;

/// Truncation budget: `GOSSAMER_MAX_TERMS` when set, else 8.
pub fn default_order() -> usize {
    std::env::var("GOSSAMER_MAX_TERMS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_ORDER)
}

/// Largest budget tried by [`with_retry`] when starting from `order`.
pub fn max_order(order: usize) -> usize {
    order.max(RETRY_CAP)
}

/// Runs `f` with a growing truncation budget while it reports that more
/// terms are needed.
pub fn with_retry<T>(order: usize, f: impl Fn(usize) -> Result<T>) -> Result<T> {
    let cap = max_order(order);
    let mut t = order.max(1);
    loop {
        match f(t) {
            Err(Error::NeedMoreTerms) => {
                if t >= cap {
                    return Err(Error::PrecisionExhausted { terms: t });
                }
                t = (t * 2).min(cap);
            }
            other => return other,
        }
    }
}

fn linear_expr(l: &crate::assume::Linear) -> Expr {
    l.to_coeff().to_expr()
}

/// Applies parameter eliminations from `a` and moves `p` to infinity.
/// The result is a normalized expression in the expansion variable.
pub fn prepare(e: &Expr, p: &Point, a: &Assumptions) -> Result<Expr> {
    let mut e = e.normalize()?;
    for (name, value) in a.substitutions() {
        e = e.substitute_param(name, &linear_expr(value))?;
    }
    match p.approach() {
        None => Ok(e),
        Some(x) => {
            if e.contains_fact() {
                return Err(Error::UndefinedAtPoint(format!("factorial can only be expanded at {}", Point::Infinity)));
            }
            e.substitute(&x)
        }
    }
}

/// Multiseries of `e` at `p` with at most `order` terms.
pub fn expand(e: &Expr, p: &Point, a: &Assumptions, order: usize) -> Result<GNum> {
    let prepared = prepare(e, p, a)?;
    let assume = Arc::new(a.clone());
    with_retry(order, |t| {
        let ctx = Arc::new(Ctx { order: t, point: p.clone(), assume: assume.clone() });
        let g = expand_in(&prepared, &ctx)?;
        if g.terms().is_empty() && g.is_exhausted() {
            return Err(Error::NeedMoreTerms);
        }
        g.truncated(order)
    })
}

/// Expansion of an already prepared expression, without retries.
pub(crate) fn expand_in(e: &Expr, ctx: &Arc<Ctx>) -> Result<GNum> {
    match e {
        Expr::Const(v) => Ok(GNum::constant(Coeff::from_q(v.clone()), ctx)),
        Expr::Param(p) => Ok(GNum::constant(Coeff::param(p), ctx)),
        Expr::Var => Ok(GNum::term(Coeff::one(), Monomial::var(), ctx)),
        Expr::Add(ts) => {
            let mut acc = GNum::zero(ctx);
            for t in ts {
                acc = acc.add(&expand_in(t, ctx)?)?;
            }
            Ok(acc)
        }
        Expr::Neg(a) => Ok(expand_in(a, ctx)?.neg()),
        Expr::Mul(fs) => {
            let mut acc = GNum::constant(Coeff::one(), ctx);
            let mut i = 0;
            while i < fs.len() {
                let mut k = 1;
                while i + k < fs.len() && fs[i + k] == fs[i] {
                    k += 1;
                }
                let f = expand_in(&fs[i], ctx)?;
                acc = acc.mul(&if k == 1 { f } else { f.powi(k as i64)? })?;
                i += k;
            }
            Ok(acc)
        }
        Expr::Div(a, b) => {
            let d = expand_in(b, ctx)?;
            expand_in(a, ctx)?.div(&d)
        }
        Expr::Ln(a) => expand_in(a, ctx)?.ln(),
        Expr::Exp(a) => expand_in(a, ctx)?.exp(),
        Expr::Pow(b, x) => {
            if let Some(k) = x.as_const().filter(|k| k.is_integer()) {
                use num_traits::ToPrimitive;
                if let Some(k) = k.to_integer().to_i64() {
                    return expand_in(b, ctx)?.powi(k);
                }
            }
            let lb = expand_in(b, ctx)?.ln()?;
            expand_in(x, ctx)?.mul(&lb)?.exp()
        }
        Expr::Fact(a) => stirling::fact(a, ctx),
    }
}
