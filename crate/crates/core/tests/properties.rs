mod common;

use common::*;
use gossamer_core::expr::{parse, print, Format};
use gossamer_core::gnum::{self, sort_by_growth};
use gossamer_core::limit::{limit, limit_lhopital, shift_point, LimitResult, DEFAULT_MAX_ROUNDS};
use gossamer_core::relate::{compare, Order, Relation};
use gossamer_core::{Expr, Point};
use proptest::prelude::*;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn decided<T>(r: gossamer_core::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) if e.is_undetermined() => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn comparison_reverses(f in positive(), g in positive()) {
        let (Some(a), Some(b)) = (decided(compare(&f, &g, &inf(), &none())), decided(compare(&g, &f, &inf(), &none())))
        else { return Ok(()) };
        prop_assert_eq!(a.magnitude, b.magnitude.reverse());
        prop_assert_eq!(a.order, b.order.reverse());
        prop_assert_eq!(a.asymptotic, b.asymptotic);
        prop_assert_eq!(a.close, b.close);
    }

    #[test]
    fn exactly_one_magnitude(f in positive(), g in positive()) {
        let Some(r) = decided(compare(&f, &g, &inf(), &none())) else { return Ok(()) };
        let hits = [Relation::MuchLess, Relation::Propto, Relation::MuchGreater]
            .iter()
            .filter(|&&z| r.satisfies(z))
            .count();
        prop_assert_eq!(hits, 1);
        if r.asymptotic {
            prop_assert_eq!(r.magnitude, Relation::Propto);
        }
    }

    #[test]
    fn positive_scalars_keep_magnitude(f in positive(), g in positive(), k in pos_rat()) {
        let kf = (px(&k) * f.clone()).normalize().unwrap();
        let (Some(a), Some(b)) = (decided(compare(&f, &g, &inf(), &none())), decided(compare(&kf, &g, &inf(), &none())))
        else { return Ok(()) };
        prop_assert_eq!(a.magnitude, b.magnitude);
    }

    #[test]
    fn print_then_parse_is_identity(e in oracle_expr()) {
        let text = print(&e, "x", Format::Plain);
        prop_assert_eq!(parse(&text).unwrap(), e);
    }

    #[test]
    fn expansion_is_multiplicative(f in positive(), g in positive()) {
        let fg = (f.clone() * g.clone()).normalize().unwrap();
        let ex = |e: &Expr| gnum::expand(e, &inf(), &none(), 6).unwrap();
        let prod = ex(&f).mul(&ex(&g)).unwrap();
        let direct = ex(&fg);
        // the difference keeps only terms above both truncation errors
        prop_assert!(prod.sub(&direct).unwrap().terms().is_empty());
    }

    #[test]
    fn lhopital_agrees_with_limit(f in divergent(), g in divergent()) {
        let direct = limit(&(f.clone() / g.clone()), &inf(), &none()).unwrap();
        let via = limit_lhopital(&f, &g, &inf(), &none(), DEFAULT_MAX_ROUNDS).unwrap();
        if direct.is_determined() && via.is_determined() {
            prop_assert_eq!(direct, via);
        }
    }

    #[test]
    fn ratio_limit_matches_magnitude(f in positive(), g in positive()) {
        let Some(r) = decided(compare(&f, &g, &inf(), &none())) else { return Ok(()) };
        let l = limit(&(f.clone() / g.clone()), &inf(), &none()).unwrap();
        match r.magnitude {
            Relation::MuchLess => prop_assert_eq!(l, LimitResult::Value(gossamer_core::Coeff::zero())),
            Relation::MuchGreater => prop_assert_eq!(l, LimitResult::PlusInfinity),
            _ => prop_assert!(matches!(l, LimitResult::Value(ref c) if !c.is_zero())),
        }
    }

    #[test]
    fn shifting_preserves_limits(k in 1i64..5, a in 1i64..4) {
        // x^k + a*x at 0+ against its image at infinity
        let e = px(&format!("x^{k} + {a}*x + 1/(x + {a})"));
        let (s, moved) = shift_point(&e, &Point::ZeroPlus).unwrap();
        prop_assert!(moved);
        prop_assert_eq!(limit(&e, &Point::ZeroPlus, &none()).unwrap(), limit(&s, &inf(), &none()).unwrap());
    }

    #[test]
    fn growth_sort_agrees_with_compare(f in divergent(), g in divergent()) {
        let Some(r) = decided(compare(&f, &g, &inf(), &none())) else { return Ok(()) };
        let sorted = sort_by_growth(&[f.clone(), g.clone()]);
        match r.magnitude {
            Relation::MuchLess => prop_assert_eq!(&sorted[0], &g),
            Relation::MuchGreater => prop_assert_eq!(&sorted[0], &f),
            _ => {}
        }
    }

    #[test]
    fn order_follows_difference_sign(f in positive(), g in positive()) {
        let Some(r) = decided(compare(&f, &g, &inf(), &none())) else { return Ok(()) };
        let d = (f.clone() - g.clone()).normalize().unwrap();
        let l = limit(&d, &inf(), &none()).unwrap();
        match l {
            LimitResult::PlusInfinity => prop_assert_eq!(r.order, Order::Greater),
            LimitResult::MinusInfinity => prop_assert_eq!(r.order, Order::Less),
            _ => {}
        }
    }
}
