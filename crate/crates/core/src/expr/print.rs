use num_traits::Signed;

use super::Expr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Plain,
    /// Sums are ordered by decreasing growth at infinity.
    LandauAware,
}

const ADD: u8 = 1;
const NEG: u8 = 2;
const MUL: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

/// Renders an expression in the input grammar, so the output parses back
/// to the same normal form.
pub fn print(e: &Expr, var: &str, format: Format) -> String {
    Printer { var, format }.go(e, 0)
}

struct Printer<'a> {
    var: &'a str,
    format: Format,
}

/// `exp(c * ln(b))` viewed as `b^c`.
fn as_power(arg: &Expr) -> Option<(&Expr, Expr, bool)> {
    match arg {
        Expr::Mul(fs) => match fs.last() {
            Some(Expr::Ln(b)) => {
                let rest: Vec<Expr> = fs[..fs.len() - 1].to_vec();
                let c = if rest.len() == 1 { rest[0].clone() } else { Expr::Mul(rest) };
                Some((b, c, false))
            }
            _ => None,
        },
        Expr::Neg(inner) => as_power(inner).and_then(|(b, c, neg)| (!neg).then_some((b, c, true))),
        _ => None,
    }
}

impl Printer<'_> {
    fn prec(&self, e: &Expr) -> u8 {
        match e {
            Expr::Const(v) if v.is_negative() => NEG,
            Expr::Const(v) if !v.is_integer() => MUL,
            Expr::Const(_) | Expr::Param(_) | Expr::Var | Expr::Ln(_) | Expr::Fact(_) => ATOM,
            Expr::Add(_) => ADD,
            Expr::Neg(_) => NEG,
            Expr::Mul(fs) if fs.len() > 1 && fs.iter().all(|f| f == &fs[0]) && self.prec(&fs[0]) == ATOM => POW,
            Expr::Mul(_) | Expr::Div(_, _) => MUL,
            Expr::Pow(_, _) => POW,
            Expr::Exp(a) => {
                if a.is_one() {
                    ATOM
                } else if as_power(a).is_some() || self.simple_exponent(a) {
                    POW
                } else {
                    ATOM
                }
            }
        }
    }

    fn simple_exponent(&self, e: &Expr) -> bool {
        match e {
            Expr::Const(v) => v.is_integer() && v.is_positive(),
            Expr::Param(_) | Expr::Var => true,
            _ => false,
        }
    }

    fn go(&self, e: &Expr, min: u8) -> String {
        let s = self.raw(e);
        if self.prec(e) < min {
            format!("({s})")
        } else {
            s
        }
    }

    fn exponent(&self, e: &Expr) -> String {
        if self.simple_exponent(e) || matches!(e, Expr::Ln(_) | Expr::Fact(_)) {
            self.raw(e)
        } else {
            format!("({})", self.raw(e))
        }
    }

    fn raw(&self, e: &Expr) -> String {
        match e {
            Expr::Const(v) => v.to_string(),
            Expr::Param(p) => p.to_string(),
            Expr::Var => self.var.to_string(),
            Expr::Add(ts) => {
                let ordered;
                let ts = if self.format == Format::LandauAware {
                    ordered = crate::gnum::sort_by_growth(ts);
                    &ordered
                } else {
                    ts
                };
                let mut out = String::new();
                for (i, t) in ts.iter().enumerate() {
                    if i == 0 {
                        out.push_str(&self.go(t, ADD));
                        continue;
                    }
                    match t {
                        Expr::Neg(inner) => {
                            out.push_str(" - ");
                            out.push_str(&self.go(inner, MUL));
                        }
                        Expr::Const(v) if v.is_negative() => {
                            out.push_str(" - ");
                            out.push_str(&self.go(&Expr::Const(-v), MUL));
                        }
                        _ => {
                            out.push_str(" + ");
                            out.push_str(&self.go(t, NEG));
                        }
                    }
                }
                out
            }
            Expr::Neg(a) => format!("-{}", self.go(a, MUL)),
            Expr::Mul(fs) => {
                let mut parts = Vec::new();
                let mut i = 0;
                while i < fs.len() {
                    let mut k = 1;
                    while i + k < fs.len() && fs[i + k] == fs[i] {
                        k += 1;
                    }
                    if k > 1 {
                        parts.push(format!("{}^{k}", self.go(&fs[i], ATOM)));
                    } else {
                        parts.push(self.go(&fs[i], MUL));
                    }
                    i += k;
                }
                parts.join("*")
            }
            Expr::Div(a, b) => format!("{}/{}", self.go(a, MUL), self.go(b, POW)),
            Expr::Ln(a) => format!("ln({})", self.go(a, 0)),
            Expr::Fact(a) => format!("fact({})", self.go(a, 0)),
            Expr::Pow(b, x) => format!("{}^{}", self.go(b, ATOM), self.exponent(x)),
            Expr::Exp(a) => {
                if a.is_one() {
                    return "e".to_string();
                }
                if let Some((b, c, neg)) = as_power(a) {
                    let c = if neg { Expr::Neg(Box::new(c)) } else { c };
                    return format!("{}^{}", self.go(b, ATOM), self.exponent(&c));
                }
                if self.simple_exponent(a) {
                    return format!("e^{}", self.raw(a));
                }
                format!("exp({})", self.go(a, 0))
            }
        }
    }
}
