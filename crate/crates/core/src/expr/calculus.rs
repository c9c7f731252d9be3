use super::Expr;
use crate::error::{Error, Result};

/// Derivative with respect to the main variable.
pub(crate) fn differentiate(e: &Expr) -> Result<Expr> {
    let e = e.normalize()?;
    if e.contains_fact() {
        return Err(Error::FactorialDomain(
            "derivative of a factorial; expand it with the Stirling series first".into(),
        ));
    }
    d(&e).normalize()
}

fn d(e: &Expr) -> Expr {
    if !e.contains_var() {
        return Expr::int(0);
    }
    match e {
        Expr::Var => Expr::int(1),
        Expr::Const(_) | Expr::Param(_) => Expr::int(0),
        Expr::Add(ts) => Expr::Add(ts.iter().map(d).collect()),
        Expr::Neg(a) => -d(a),
        Expr::Mul(fs) => {
            let mut terms = Vec::new();
            for i in 0..fs.len() {
                if !fs[i].contains_var() {
                    continue;
                }
                let mut prod: Vec<Expr> = fs.clone();
                prod[i] = d(&fs[i]);
                terms.push(Expr::Mul(prod));
            }
            Expr::Add(terms)
        }
        Expr::Div(a, b) => {
            let (a, b) = (&**a, &**b);
            (d(a) * b.clone() - a.clone() * d(b)) / (b.clone() * b.clone())
        }
        Expr::Ln(a) => d(a) / (**a).clone(),
        Expr::Exp(a) => d(a) * e.clone(),
        Expr::Pow(b, x) => {
            // b^x = exp(x ln b)
            let inner = (**x).clone() * (**b).clone().ln();
            d(&inner) * e.clone()
        }
        Expr::Fact(_) => unreachable!("factorials are rejected before differentiation"),
    }
}
