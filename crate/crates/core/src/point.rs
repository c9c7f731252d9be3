use std::fmt;

use num_traits::{Signed, Zero};

use crate::coeff::Q;
use crate::error::{Error, ParseError, Result};
use crate::expr::{parse_decimal, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
    Both,
}

/// Where the main variable goes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    ZeroPlus,
    ZeroMinus,
    Finite(Q, Side),
}

impl Point {
    pub fn finite(a: Q, side: Side) -> Point {
        if a.is_zero() {
            match side {
                Side::Plus => return Point::ZeroPlus,
                Side::Minus => return Point::ZeroMinus,
                Side::Both => {}
            }
        }
        Point::Finite(a, side)
    }

    pub fn is_two_sided(&self) -> bool {
        matches!(self, Point::Finite(_, Side::Both))
    }

    /// The one-sided approaches making up this point.
    pub fn sides(&self) -> Vec<Point> {
        match self {
            Point::Finite(a, Side::Both) => {
                vec![Point::finite(a.clone(), Side::Minus), Point::finite(a.clone(), Side::Plus)]
            }
            p => vec![p.clone()],
        }
    }

    /// Expression for the main variable in terms of a new variable that
    /// tends to infinity. Two-sided points use the plus side.
    pub fn approach(&self) -> Option<Expr> {
        let inv_t = || Expr::int(1) / Expr::Var;
        match self {
            Point::Infinity => None,
            Point::ZeroPlus => Some(inv_t()),
            Point::ZeroMinus => Some(-inv_t()),
            Point::Finite(a, Side::Minus) => Some(Expr::rat(a.clone()) - inv_t()),
            Point::Finite(a, _) => Some(Expr::rat(a.clone()) + inv_t()),
        }
    }

    /// Inverse of [`Point::approach`]: the new variable as a function of the
    /// original one.
    pub fn retreat(&self) -> Option<Expr> {
        let one = || Expr::int(1);
        match self {
            Point::Infinity => None,
            Point::ZeroPlus => Some(one() / Expr::Var),
            Point::ZeroMinus => Some(-(one() / Expr::Var)),
            Point::Finite(a, Side::Minus) => Some(one() / (Expr::rat(a.clone()) - Expr::Var)),
            Point::Finite(a, _) => Some(one() / (Expr::Var - Expr::rat(a.clone()))),
        }
    }

    /// Parses `x=inf`, `x=0+`, `x=0-`, `x=2`, `x=-1/2+`; returns the
    /// variable name and the point.
    pub fn parse_spec(spec: &str) -> Result<(String, Point)> {
        let err = |offset: usize, expected: &str, found: &str| {
            Error::Parse(ParseError { offset, expected: vec![expected.to_string()], found: found.to_string() })
        };
        let Some((var, rest)) = spec.split_once('=') else {
            return Err(err(spec.len(), "'='", "end of input"));
        };
        let var = var.trim();
        if var.is_empty() || !var.chars().next().unwrap().is_ascii_alphabetic() {
            return Err(err(0, "variable name", var));
        }
        let off = var.len() + 1;
        let rest = rest.trim();
        if matches!(rest, "inf" | "+inf" | "oo" | "infinity") {
            return Ok((var.to_string(), Point::Infinity));
        }
        let (body, side) = if let Some(b) = rest.strip_suffix('+') {
            (b, Side::Plus)
        } else if let Some(b) = rest.strip_suffix('-') {
            (b, Side::Minus)
        } else {
            (rest, Side::Both)
        };
        let (neg, body) = match body.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, body),
        };
        let value = match body.split_once('/') {
            Some((n, d)) => {
                let n = parse_decimal(n.trim());
                let d = parse_decimal(d.trim()).filter(|d| !d.is_zero());
                n.zip(d).map(|(n, d)| n / d)
            }
            None => parse_decimal(body.trim()),
        };
        let Some(mut a) = value else {
            return Err(err(off, "inf, a rational, or a rational followed by + or -", rest));
        };
        if neg {
            a = -a;
        }
        Ok((var.to_string(), Point::finite(a, side)))
    }

    pub fn describe(&self, var: &str) -> String {
        match self {
            Point::Infinity => format!("{var}=inf"),
            Point::ZeroPlus => format!("{var}=0+"),
            Point::ZeroMinus => format!("{var}=0-"),
            Point::Finite(a, s) => {
                let suffix = match s {
                    Side::Plus => "+",
                    Side::Minus => "-",
                    Side::Both => "",
                };
                format!("{var}={a}{suffix}")
            }
        }
    }

    pub fn is_negative_side(&self) -> bool {
        match self {
            Point::ZeroMinus => true,
            Point::Finite(a, Side::Minus) => !a.is_positive(),
            _ => false,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, q2};

    #[test]
    fn point_specs() {
        assert_eq!(Point::parse_spec("x=inf").unwrap(), ("x".into(), Point::Infinity));
        assert_eq!(Point::parse_spec("x=0+").unwrap().1, Point::ZeroPlus);
        assert_eq!(Point::parse_spec("v=0-").unwrap().1, Point::ZeroMinus);
        assert_eq!(Point::parse_spec("x=0").unwrap().1, Point::Finite(q(0), Side::Both));
        assert_eq!(Point::parse_spec("x=2+").unwrap().1, Point::Finite(q(2), Side::Plus));
        assert_eq!(Point::parse_spec("x=-1/2-").unwrap().1, Point::Finite(q2(-1, 2), Side::Minus));
        assert!(Point::parse_spec("x").is_err());
        assert!(Point::parse_spec("x=abc").is_err());
    }

    #[test]
    fn approach_and_retreat_are_inverse() {
        for p in [Point::ZeroPlus, Point::ZeroMinus, Point::Finite(q(2), Side::Plus), Point::Finite(q(2), Side::Minus)]
        {
            let there = p.approach().unwrap();
            let back = p.retreat().unwrap();
            let round = there.substitute(&back).unwrap();
            assert_eq!(round, Expr::Var, "{p:?}");
        }
    }
}
