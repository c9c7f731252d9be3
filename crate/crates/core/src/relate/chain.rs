//! Derivation chains: a sequence of relations, each solved directly or
//! obtained from the previous line by an operation.
//!
//! ```text
//! assume Delta > 0
//! x ; succ ; Delta*ln(x) ; at x=inf ; by solve
//! exp(x) ; succ ; x^Delta ; at x=inf ; by exp
//! ```

use std::fmt;

use crate::assume::Assumptions;
use crate::error::{Error, ParseError, Result};
use crate::expr::{print, Context, Expr, Format};
use crate::gnum;
use crate::point::Point;

use super::{apply_rel_op, compare, implies, logdom, RelCtx, RelOp, Relation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Solve,
    Absorb,
    Op(RelOp),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Solve => f.write_str("solve"),
            Justification::Absorb => f.write_str("absorb"),
            Justification::Op(op) => write!(f, "{op}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainStep {
    pub lhs: Expr,
    pub rel: Relation,
    pub rhs: Expr,
    pub var: String,
    pub point: Point,
    pub by: Justification,
    /// 1-based source line.
    pub line: usize,
}

impl ChainStep {
    pub fn render(&self) -> String {
        let v = &self.var;
        format!("{} {} {}", print(&self.lhs, v, Format::Plain), self.rel.token(), print(&self.rhs, v, Format::Plain))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Chain {
    pub assume: Assumptions,
    pub steps: Vec<ChainStep>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Ok,
    Fail(String),
    /// The engine could not decide; carries the blocking error.
    Undetermined(Error),
}

impl StepStatus {
    pub fn is_ok(&self) -> bool {
        *self == StepStatus::Ok
    }
}

impl fmt::Display for StepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepStatus::Ok => f.write_str("OK"),
            StepStatus::Fail(r) => write!(f, "FAIL: {r}"),
            StepStatus::Undetermined(e) => write!(f, "FAIL: undetermined: {e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub line: usize,
    pub step: String,
    pub status: StepStatus,
}

#[derive(Clone, Debug, Default)]
pub struct ChainReport {
    pub steps: Vec<StepReport>,
}

impl ChainReport {
    pub fn all_ok(&self) -> bool {
        self.steps.iter().all(|s| s.status.is_ok())
    }

    /// Index of the first step that did not verify.
    pub fn first_failure(&self) -> Option<usize> {
        self.steps.iter().position(|s| !s.status.is_ok())
    }

    pub fn has_fail(&self) -> bool {
        self.steps.iter().any(|s| matches!(s.status, StepStatus::Fail(_)))
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {} (line {}): {}   [{}]", i + 1, s.line, s.status, s.step)?;
        }
        Ok(())
    }
}

fn perr(offset: usize, expected: &str, found: &str) -> Error {
    Error::Parse(ParseError { offset, expected: vec![expected.to_string()], found: found.to_string() })
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Parse(mut p) => {
            p.offset += by;
            Error::Parse(p)
        }
        other => other,
    }
}

/// Byte offset of `part` inside `whole`; both come from the same buffer.
fn offset_in(whole: &str, part: &str) -> usize {
    part.as_ptr() as usize - whole.as_ptr() as usize
}

fn parse_op(text: &str, ctx: &Context, base: usize) -> Result<Justification> {
    let t = text.trim();
    let simple = match t {
        "solve" => Some(Justification::Solve),
        "absorb" => Some(Justification::Absorb),
        "exp" => Some(Justification::Op(RelOp::ApplyExp)),
        "ln" => Some(Justification::Op(RelOp::ApplyLn)),
        "D" => Some(Justification::Op(RelOp::Differentiate)),
        "int" => Some(Justification::Op(RelOp::Integrate)),
        "recip" => Some(Justification::Op(RelOp::Reciprocal)),
        "neg" => Some(Justification::Op(RelOp::Negate)),
        _ => None,
    };
    if let Some(j) = simple {
        return Ok(j);
    }
    let expected = "solve, absorb, exp, ln, D, int, mul(..), add(..), recip or neg";
    for (name, is_mul) in [("mul(", true), ("add(", false)] {
        if let Some(rest) = t.strip_prefix(name) {
            let Some(arg) = rest.strip_suffix(')') else {
                return Err(perr(base + t.len(), "')'", "end of input"));
            };
            let e = ctx.parse(arg).map_err(|e| shift(e, base + name.len()))?.expr;
            let op = match (is_mul, e.as_const()) {
                (true, Some(k)) => RelOp::ScalarMul(k.clone()),
                (true, None) => RelOp::MulBy(e),
                (false, _) => RelOp::AddBoth(e),
            };
            return Ok(Justification::Op(op));
        }
    }
    Err(perr(base, expected, t))
}

/// Parses a chain file. Blank lines and lines starting with `#` are
/// ignored; `assume <constraints>` lines add to the assumption set.
pub fn parse_chain(text: &str) -> Result<Chain> {
    let mut assume_parts: Vec<String> = Vec::new();
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let base = offset_in(text, line);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("assume ") {
            Assumptions::parse(rest).map_err(|e| shift(e, offset_in(text, rest)))?;
            assume_parts.push(rest.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = line.split(';').collect();
        if fields.len() != 5 {
            return Err(perr(base, "5 fields separated by ';'", &format!("{} fields", fields.len())));
        }
        let off = |f: &str| offset_in(text, f);
        let at = fields[3].trim();
        let Some(spec) = at.strip_prefix("at ") else {
            return Err(perr(off(fields[3]), "'at <var>=<point>'", at));
        };
        let (var, point) = Point::parse_spec(spec).map_err(|e| shift(e, offset_in(text, spec)))?;
        let ctx = Context::new().with_var(&var);
        let lhs = ctx.parse(fields[0]).map_err(|e| shift(e, off(fields[0])))?.expr;
        let rhs = ctx.parse(fields[2]).map_err(|e| shift(e, off(fields[2])))?.expr;
        let tok = fields[1].trim();
        let Some(rel) = Relation::from_token(tok) else {
            return Err(perr(off(fields[1]), "relation token", tok));
        };
        let by_field = fields[4].trim();
        let Some(by) = by_field.strip_prefix("by ") else {
            return Err(perr(off(fields[4]), "'by <op|solve|absorb>'", by_field));
        };
        let by = parse_op(by, &ctx, offset_in(text, by))?;
        steps.push(ChainStep { lhs, rel, rhs, var, point, by, line: i + 1 });
    }
    let assume = Assumptions::parse(&assume_parts.join(", "))?;
    Ok(Chain { assume, steps })
}

/// Exact equality of two expressions: equal normal forms, or a difference
/// whose expansion is exactly zero.
fn same(a: &Expr, b: &Expr, p: &Point, assume: &Assumptions) -> Result<bool> {
    let d = (a.clone() - b.clone()).normalize()?;
    if d.is_zero() {
        return Ok(true);
    }
    if !d.contains_var() {
        return Ok(false);
    }
    match gnum::expand(&d, p, assume, gnum::default_order()) {
        Ok(g) => Ok(g.is_exact_zero()),
        Err(e) if e.is_undetermined() => Ok(false),
        Err(e) => Err(e),
    }
}

fn outcome(r: Result<StepStatus>) -> StepStatus {
    match r {
        Ok(s) => s,
        Err(e) if e.is_undetermined() => StepStatus::Undetermined(e),
        Err(e) => StepStatus::Fail(e.to_string()),
    }
}

fn check_solve(s: &ChainStep, a: &Assumptions) -> Result<StepStatus> {
    let (f, g, p) = (&s.lhs, &s.rhs, &s.point);
    let v = &s.var;
    let show = |e: &Expr| print(e, v, Format::Plain);
    let actual = match s.rel {
        Relation::LogMuchGreater | Relation::LogMuchLess => {
            let (x, y) = if s.rel == Relation::LogMuchGreater { (f, g) } else { (g, f) };
            if logdom(x, y, p, a)? {
                return Ok(StepStatus::Ok);
            }
            format!("ln({}) does not dominate ln({})", show(x), show(y))
        }
        rel => {
            let r = compare(f, g, p, a)?;
            if r.satisfies(rel) {
                return Ok(StepStatus::Ok);
            }
            let found = if rel.is_order() {
                r.order.token()
            } else if rel == Relation::SimEq {
                if r.close {
                    "simeq"
                } else {
                    "not simeq"
                }
            } else {
                r.verdict().token()
            };
            format!("{} {} {}", show(f), found, show(g))
        }
    };
    Ok(StepStatus::Fail(format!("contradiction: {actual} at {}, asserted {}", p.describe(v), s.rel.token())))
}

fn check_derived(prev: &ChainStep, s: &ChainStep, a: &Assumptions) -> Result<StepStatus> {
    let prev_ctx = RelCtx::new(prev.lhs.clone(), prev.rhs.clone(), prev.point.clone(), a.clone());
    let this_ctx = RelCtx::new(s.lhs.clone(), s.rhs.clone(), s.point.clone(), a.clone());
    let v = &s.var;
    let show = |e: &Expr| print(e, v, Format::Plain);
    match &s.by {
        Justification::Solve => unreachable!(),
        Justification::Absorb => {
            for (new, old) in [(&s.lhs, &prev.lhs), (&s.rhs, &prev.rhs)] {
                if !same(new, old, &s.point, a)? && !compare(new, old, &s.point, a)?.asymptotic {
                    return Ok(StepStatus::Fail(format!("{} is not asymptotic to {}", show(new), show(old))));
                }
            }
            if !s.rel.is_magnitude() {
                return Ok(StepStatus::Fail(format!("absorb keeps only magnitude relations, not {}", s.rel.token())));
            }
            if !implies(prev.rel, s.rel, &prev_ctx)? {
                return Ok(StepStatus::Fail(format!("{} does not imply {}", prev.rel.token(), s.rel.token())));
            }
            Ok(StepStatus::Ok)
        }
        Justification::Op(op) => {
            if *op == RelOp::Integrate {
                for (new, old) in [(&s.lhs, &prev.lhs), (&s.rhs, &prev.rhs)] {
                    let d = new.differentiate()?;
                    if !same(&d, old, &s.point, a)? {
                        return Ok(StepStatus::Fail(format!(
                            "D({}) = {}, expected {}",
                            show(new),
                            show(&d),
                            show(old)
                        )));
                    }
                }
            } else {
                for (new, old) in [(&s.lhs, &prev.lhs), (&s.rhs, &prev.rhs)] {
                    let want = op.apply_expr(old)?;
                    if !same(new, &want, &s.point, a)? {
                        return Ok(StepStatus::Fail(format!(
                            "{} applied to {} gives {}, not {}",
                            op.render(v),
                            show(old),
                            show(&want),
                            show(new)
                        )));
                    }
                }
            }
            let derived = match apply_rel_op(prev.rel, op, &prev_ctx) {
                Ok(r) => r,
                Err(e @ (Error::ConditionViolated(_) | Error::UnsupportedRow { .. })) => {
                    return Ok(StepStatus::Fail(e.to_string()))
                }
                Err(e) => return Err(e),
            };
            if implies(derived, s.rel, &this_ctx)? {
                Ok(StepStatus::Ok)
            } else {
                Ok(StepStatus::Fail(format!(
                    "{} turns {} into {}, which does not give {}",
                    op.render(v),
                    prev.rel.token(),
                    derived.token(),
                    s.rel.token()
                )))
            }
        }
    }
}

/// Checks every step. `solve` steps are checked against the engine on their
/// own; other steps are derived from the step before and fail when that
/// step failed.
pub fn verify_chain(c: &Chain) -> ChainReport {
    let mut out: Vec<StepReport> = Vec::with_capacity(c.steps.len());
    for (i, s) in c.steps.iter().enumerate() {
        let status = if s.by == Justification::Solve {
            outcome(check_solve(s, &c.assume))
        } else if i == 0 {
            StepStatus::Fail(format!("'by {}' needs a previous step", s.by))
        } else {
            let prev = &c.steps[i - 1];
            if !out[i - 1].status.is_ok() {
                StepStatus::Fail(format!("follows from step {i}, which failed"))
            } else if prev.var != s.var || prev.point != s.point {
                StepStatus::Fail(format!(
                    "point {} differs from the previous step's {}",
                    s.point.describe(&s.var),
                    prev.point.describe(&prev.var)
                ))
            } else {
                outcome(check_derived(prev, s, &c.assume))
            }
        };
        out.push(StepReport { line: s.line, step: s.render(), status });
    }
    ChainReport { steps: out }
}
