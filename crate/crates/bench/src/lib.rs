//! Inputs shared by the engine benchmarks.

use gossamer_core::{Assumptions, Context, Expr, Point};

/// A parsed comparison or limit problem.
pub struct Case {
    pub name: &'static str,
    pub f: Expr,
    pub g: Option<Expr>,
    pub point: Point,
    pub assume: Assumptions,
}

fn case(name: &'static str, f: &str, g: Option<&str>, at: &str, assume: &str) -> Case {
    let (var, point) = Point::parse_spec(at).expect("point");
    let ctx = Context::new().with_var(&var);
    let parse = |s: &str| ctx.parse(s).unwrap_or_else(|e| panic!("{s}: {e}")).expr;
    Case { name, f: parse(f), g: g.map(parse), point, assume: Assumptions::parse(assume).expect("assumptions") }
}

pub fn comparisons() -> Vec<Case> {
    vec![
        case("exp_vs_power", "exp(x)", Some("x^Delta"), "x=inf", "Delta > 0"),
        case("stirling", "n^n*n", Some("exp(n)*fact(n)"), "n=inf", ""),
        case("log_vs_power", "ln(x)^b", Some("x^a"), "x=inf", "a > 0, b > 0"),
        case("iterated_logs", "ln(ln(x^3 + 2*x))", Some("ln(ln(5*x^2 + 1))"), "x=inf", ""),
        case("mu_v", "x^mu*exp(ln(x)^v)", Some("x"), "x=inf", "mu > 0, v > 0, mu + v < 1"),
    ]
}

pub fn limits() -> Vec<Case> {
    vec![
        case("rational", "(3*n+5)/(5*n)", None, "n=inf", ""),
        case("exp_difference", "(a^x - b^x)/x", None, "x=0", ""),
        case("power_tower", "(1-2^x)^x", None, "x=0-", ""),
        case("compound_interest", "(1 - 2/n)^n", None, "n=inf", ""),
        case("nested_log_inverse", "1/ln(5/4 + 1/ln(x))", None, "x=inf", ""),
    ]
}

/// A chain with one exponentiation step.
pub const CHAIN: &str = "\
assume Delta > 0
x ; succ ; Delta*ln(x) ; at x=inf ; by solve
exp(x) ; succ ; x^Delta ; at x=inf ; by exp
";
