use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::coeff::{q, Coeff, Q};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::point::Point;
use crate::scale::{Element, Monomial};

use super::{Ctx, GNum};

static BERNOULLI: Mutex<Vec<Q>> = Mutex::new(Vec::new());

/// `B_0 ..= B_n` with `B_1 = -1/2`.
pub(crate) fn bernoulli(n: usize) -> Vec<Q> {
    let mut cache = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    if cache.is_empty() {
        cache.push(Q::one());
    }
    while cache.len() <= n {
        let m = cache.len();
        // sum_{k<m} C(m+1, k) B_k + (m+1) B_m = 0
        let mut binom = BigInt::one();
        let mut s = Q::zero();
        for (k, b) in cache.iter().enumerate() {
            s += Q::from_integer(binom.clone()) * b;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        cache.push(-s / Q::from_integer(BigInt::from(m + 1)));
    }
    cache[..=n].to_vec()
}

/// `(t + c)!` at infinity from the Stirling series of `ln Gamma`.
pub(crate) fn fact(arg: &Expr, ctx: &Arc<Ctx>) -> Result<GNum> {
    if ctx.point != Point::Infinity {
        return Err(Error::UndefinedAtPoint("factorial away from infinity".into()));
    }
    let shift = (arg.clone() - Expr::Var).normalize()?;
    let Some(c) = shift.as_const().cloned() else {
        return Err(Error::FactorialDomain(arg.to_string()));
    };
    let u = GNum::build(vec![(Coeff::one(), Monomial::var()), (Coeff::from_q(c), Monomial::one())], None, ctx)?;
    let ln_u = u.ln()?;
    let half = Coeff::from_q(crate::coeff::q2(1, 2));
    let mut s = u.mul(&ln_u)?.sub(&u)?.add(&ln_u.scale(&half))?;
    s = s.add(&GNum::constant(Coeff::ln_2pi().mul(&half), ctx))?;
    let k_max = ctx.order;
    let b = bernoulli(2 * k_max);
    let inv_u = u.inv()?;
    let inv_u2 = inv_u.mul(&inv_u)?;
    let mut p = inv_u;
    for k in 1..=k_max {
        let kk = k as i64;
        let coef = &b[2 * k] / q(2 * kk * (2 * kk - 1));
        s = s.add(&p.scale(&Coeff::from_q(coef)))?;
        if k < k_max {
            p = p.mul(&inv_u2)?;
        }
    }
    let err = Monomial::power(Element::Var, Coeff::from(-(2 * k_max as i64 + 1)));
    s.with_error(err)?.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::q2;

    #[test]
    fn bernoulli_numbers() {
        let b = bernoulli(12);
        assert_eq!(b[1], q2(-1, 2));
        assert_eq!(b[2], q2(1, 6));
        assert_eq!(b[3], q(0));
        assert_eq!(b[4], q2(-1, 30));
        assert_eq!(b[6], q2(1, 42));
        assert_eq!(b[12], q2(-691, 2730));
    }

    #[test]
    fn stirling_coefficients() {
        let b = bernoulli(4);
        assert_eq!(&b[2] / q(2), q2(1, 12));
        assert_eq!(&b[4] / q(12), q2(-1, 360));
    }
}
