//! Expressions in one main variable.
//!
//! [`Expr`] trees are built by the parser or by the constructor helpers and
//! brought into a canonical shape by [`Expr::normalize`]. The main variable
//! is nameless inside the tree; its display name travels separately (see
//! [`Parsed`]).

mod calculus;
mod normal;
mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::coeff::{q, Q};
use crate::error::Result;

pub use parse::{parse, parse_decimal, Context, Parsed};
pub use print::{print, Format};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Q),
    Param(Arc<str>),
    Var,
    Add(Vec<Expr>),
    Neg(Box<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Ln(Box<Expr>),
    Exp(Box<Expr>),
    /// Only present before normalization.
    Pow(Box<Expr>, Box<Expr>),
    Fact(Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(q(n))
    }

    pub fn rat(v: Q) -> Expr {
        Expr::Const(v)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(Arc::from(name))
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    /// Euler's number.
    pub fn e() -> Expr {
        Expr::Exp(Box::new(Expr::int(1)))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn fact(self) -> Expr {
        Expr::Fact(Box::new(self))
    }

    pub fn pow(self, e: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(e))
    }

    pub fn powi(self, k: i64) -> Expr {
        self.pow(Expr::int(k))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if v.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(v) if v.is_one())
    }

    pub fn as_const(&self) -> Option<&Q> {
        match self {
            Expr::Const(v) => Some(v),
            _ => None,
        }
    }

    /// Canonical form; see the module docs of the normalizer for the rules.
    pub fn normalize(&self) -> Result<Expr> {
        normal::normalize(self)
    }

    pub fn contains_var(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Var))
    }

    pub fn contains_fact(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Fact(_)))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().iter().any(|c| c.any(pred))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Param(_) | Expr::Var => vec![],
            Expr::Add(v) | Expr::Mul(v) => v.iter().collect(),
            Expr::Neg(a) | Expr::Ln(a) | Expr::Exp(a) | Expr::Fact(a) => vec![a],
            Expr::Div(a, b) | Expr::Pow(a, b) => vec![a, b],
        }
    }

    pub fn params(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<Arc<str>>) {
        if let Expr::Param(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_params(out);
        }
    }

    /// Rebuilds the tree bottom-up through `f`.
    pub fn map(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            Expr::Const(_) | Expr::Param(_) | Expr::Var => self.clone(),
            Expr::Add(v) => Expr::Add(v.iter().map(|e| e.map(f)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|e| e.map(f)).collect()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.map(f))),
            Expr::Ln(a) => Expr::Ln(Box::new(a.map(f))),
            Expr::Exp(a) => Expr::Exp(Box::new(a.map(f))),
            Expr::Fact(a) => Expr::Fact(Box::new(a.map(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.map(f)), Box::new(b.map(f))),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.map(f)), Box::new(b.map(f))),
        }
    }

    /// Replaces every occurrence of the main variable and normalizes.
    pub fn substitute(&self, replacement: &Expr) -> Result<Expr> {
        self.map(&|e| matches!(e, Expr::Var).then(|| replacement.clone())).normalize()
    }

    /// Replaces the named parameter and normalizes.
    pub fn substitute_param(&self, name: &str, replacement: &Expr) -> Result<Expr> {
        self.map(&|e| match e {
            Expr::Param(p) if &**p == name => Some(replacement.clone()),
            _ => None,
        })
        .normalize()
    }

    /// Symbolic derivative with respect to the main variable, normalized.
    pub fn differentiate(&self) -> Result<Expr> {
        calculus::differentiate(self)
    }

    /// Number of nodes, used to bound random generators and recursion.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Evaluates at a real point with parameters bound by `param`.
    /// Returns `None` outside the real domain.
    pub fn eval_f64(&self, x: f64, param: &dyn Fn(&str) -> Option<f64>) -> Option<f64> {
        let v = match self {
            Expr::Const(c) => num_traits::ToPrimitive::to_f64(c)?,
            Expr::Param(p) => param(p)?,
            Expr::Var => x,
            Expr::Add(v) => v.iter().map(|e| e.eval_f64(x, param)).sum::<Option<f64>>()?,
            Expr::Mul(v) => v.iter().map(|e| e.eval_f64(x, param)).product::<Option<f64>>()?,
            Expr::Neg(a) => -a.eval_f64(x, param)?,
            Expr::Div(a, b) => a.eval_f64(x, param)? / b.eval_f64(x, param)?,
            Expr::Ln(a) => {
                let v = a.eval_f64(x, param)?;
                if v <= 0.0 {
                    return None;
                }
                v.ln()
            }
            Expr::Exp(a) => a.eval_f64(x, param)?.exp(),
            Expr::Pow(a, b) => a.eval_f64(x, param)?.powf(b.eval_f64(x, param)?),
            Expr::Fact(a) => {
                let v = a.eval_f64(x, param)?;
                ln_gamma(v + 1.0)?.exp()
            }
        };
        v.is_finite().then_some(v)
    }
}

/// Lanczos approximation of `ln Gamma(z)` for `z > 0`.
pub(crate) fn ln_gamma(z: f64) -> Option<f64> {
    if z <= 0.0 {
        return None;
    }
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        return Some((pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z)?);
    }
    let z = z - 1.0;
    let mut a = C[0];
    let t = z + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    Some(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln())
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Q> for Expr {
    fn from(v: Q) -> Expr {
        Expr::Const(v)
    }
}

impl From<BigInt> for Expr {
    fn from(v: BigInt) -> Expr {
        Expr::Const(Q::from_integer(v))
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::Add(vec![self, o])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(o))])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::Mul(vec![self, o])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(o))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Displays with `x` as the main variable.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self, "x", Format::Plain))
    }
}
