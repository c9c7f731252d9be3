//! Random expression families and a log-domain evaluator shared by the
//! property and acceptance suites.
#![allow(dead_code)]

use gossamer_core::expr::Context;
use gossamer_core::{Assumptions, Expr, Point};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

pub fn px(s: &str) -> Expr {
    Context::new().with_var("x").parse(s).unwrap_or_else(|e| panic!("{s}: {e}")).expr
}

pub fn inf() -> Point {
    Point::Infinity
}

pub fn none() -> Assumptions {
    Assumptions::new()
}

/// Draws one value from a strategy.
pub fn draw<S: Strategy>(s: &S, runner: &mut TestRunner) -> S::Value {
    s.new_tree(runner).expect("strategy").current()
}

fn pick<T: Clone + std::fmt::Debug + 'static>(xs: &'static [T]) -> impl Strategy<Value = T> {
    proptest::sample::select(xs)
}

/// Positive rational text such as `3` or `5/2`.
pub fn pos_rat() -> impl Strategy<Value = String> {
    (1i64..=9, 1i64..=4).prop_map(|(n, d)| if d == 1 { n.to_string() } else { format!("({n}/{d})") })
}

/// Nonzero rational text of either sign.
pub fn nz_rat() -> impl Strategy<Value = String> {
    (pos_rat(), any::<bool>()).prop_map(|(r, neg)| if neg { format!("(-{r})") } else { r })
}

/// `c * x^p * ln(x)^q` tending to `+inf`.
fn power_log() -> impl Strategy<Value = String> {
    (1i64..=5, pick(&["1/2", "1", "3/2", "2", "3"]), pick(&[-1i64, 0, 0, 1, 2]))
        .prop_map(|(c, p, q)| format!("{c}*x^({p})*ln(x)^({q})"))
}

fn slow() -> impl Strategy<Value = String> {
    (1i64..=4, 1i64..=3).prop_map(|(c, k)| format!("{c}*ln(x)^{k}"))
}

fn fast() -> impl Strategy<Value = String> {
    (1i64..=3, pick(&["exp(x)", "exp(x^(1/2))", "exp(2*x)", "exp(ln(x)^2)", "x^x"]))
        .prop_map(|(c, e)| format!("{c}*{e}"))
}

/// Positive expressions tending to `+inf`.
pub fn divergent() -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => power_log(),
        1 => slow(),
        1 => fast(),
        2 => (power_log(), pos_rat()).prop_map(|(a, c)| format!("{a} + {c}")),
        1 => (power_log(), slow()).prop_map(|(a, b)| format!("{a} + {b}")),
    ]
    .prop_map(|s| px(&s))
}

/// Positive infinitesimals.
pub fn infinitesimal() -> impl Strategy<Value = Expr> {
    divergent().prop_map(|d| (Expr::int(1) / d).normalize().unwrap())
}

/// Positive expressions with a finite nonzero limit.
pub fn finite_pos() -> impl Strategy<Value = Expr> {
    (pos_rat(), infinitesimal(), any::<bool>()).prop_map(|(c, i, plus)| {
        let c = px(&c);
        if plus { c + i } else { c.clone() + i / (Expr::int(2) * c) }.normalize().unwrap()
    })
}

/// Positive expressions of any size class.
pub fn positive() -> impl Strategy<Value = Expr> {
    prop_oneof![2 => divergent(), 1 => infinitesimal(), 1 => finite_pos()]
}

/// Parameter-free positive comparands for the numeric oracle.
pub fn oracle_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => positive(),
        1 => (positive(), positive()).prop_map(|(a, b)| (a * b).normalize().unwrap()),
        1 => (divergent(), positive()).prop_map(|(a, b)| (a + b).normalize().unwrap()),
    ]
}

/// Sign and `ln |value|` of `e` at `x`, evaluated without forming large
/// intermediates. `None` when a sample is outside the float range or a sum
/// cancels too far to trust.
pub fn ln_abs(e: &Expr, x: f64) -> Option<(f64, f64)> {
    let r = match e {
        Expr::Const(c) => {
            let v = num_traits::ToPrimitive::to_f64(c)?;
            if v == 0.0 {
                return None;
            }
            (v.signum(), v.abs().ln())
        }
        Expr::Var => (1.0, x.ln()),
        Expr::Param(_) | Expr::Pow(..) => return None,
        Expr::Neg(a) => {
            let (s, l) = ln_abs(a, x)?;
            (-s, l)
        }
        Expr::Mul(fs) => {
            let mut s = 1.0;
            let mut l = 0.0;
            for f in fs {
                let (fs, fl) = ln_abs(f, x)?;
                s *= fs;
                l += fl;
            }
            (s, l)
        }
        Expr::Div(a, b) => {
            let (sa, la) = ln_abs(a, x)?;
            let (sb, lb) = ln_abs(b, x)?;
            (sa * sb, la - lb)
        }
        Expr::Add(ts) => {
            let parts: Vec<(f64, f64)> = ts.iter().map(|t| ln_abs(t, x)).collect::<Option<_>>()?;
            let top = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = parts.iter().map(|(s, l)| s * (l - top).exp()).sum();
            if sum.abs() < 1e-9 {
                return None;
            }
            (sum.signum(), top + sum.abs().ln())
        }
        Expr::Exp(a) => {
            let (s, l) = ln_abs(a, x)?;
            if l > 700.0 {
                return None;
            }
            (1.0, s * l.exp())
        }
        Expr::Ln(a) => {
            let (s, l) = ln_abs(a, x)?;
            if s < 0.0 || l == 0.0 {
                return None;
            }
            (l.signum(), l.abs().ln())
        }
        Expr::Fact(a) => {
            let (s, l) = ln_abs(a, x)?;
            if s < 0.0 || l > 700.0 {
                return None;
            }
            let n = l.exp();
            let lg = n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln();
            (1.0, lg)
        }
    };
    (r.1.is_finite()).then_some(r)
}

/// `ln |f(x)| - ln |g(x)|`.
pub fn log_gap(f: &Expr, g: &Expr, x: f64) -> Option<f64> {
    Some(ln_abs(f, x)?.1 - ln_abs(g, x)?.1)
}
