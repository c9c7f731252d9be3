use std::io::Read;

use gossamer_core::expr::{print, Context, Format};
use gossamer_core::gnum::{self, default_order};
use gossamer_core::limit::{self, decimal, sqrt2_digits, sqrt2_reference};
use gossamer_core::relate::{self, parse_chain, verify_chain, Relation};
use gossamer_core::scale::{self, Family};
use gossamer_core::{Assumptions, Error, Expr, LimitResult, Point};

use crate::report::{exit_code, Report, FAILED, OK, UNDETERMINED};
use crate::{Command, Where};

/// Digits the demo is expected to reach after five iterations.
const SQRT2_TARGET: usize = 47;

struct Setup {
    ctx: Context,
    var: String,
    point: Point,
    assume: Assumptions,
    declared: Vec<String>,
}

impl Setup {
    fn new(w: &Where) -> Result<Setup, Report> {
        let (var, point) = Point::parse_spec(&w.at).map_err(|e| labelled("--at", &e))?;
        let assume = Assumptions::parse(&w.assume).map_err(|e| labelled("--assume", &e))?;
        let declared: Vec<String> = w.param.iter().map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
        let ctx = Context::new().with_var(&var).with_params(declared.iter().map(String::as_str));
        Ok(Setup { ctx, var, point, assume, declared })
    }

    fn parse(&self, what: &str, text: &str) -> Result<Expr, Report> {
        let e = self.ctx.parse(text).map_err(|e| labelled(what, &e))?.expr;
        if !self.declared.is_empty() {
            if let Some(p) = e.params().iter().find(|p| !self.declared.iter().any(|d| d == &***p)) {
                return Err(Report::usage(format!(
                    "{what}: undeclared identifier '{p}' (declared: {})",
                    self.declared.join(", ")
                )));
            }
        }
        Ok(e)
    }

    fn show(&self, e: &Expr) -> String {
        print(e, &self.var, Format::Plain)
    }
}

fn labelled(what: &str, e: &Error) -> Report {
    let mut r = Report::error(e);
    r.diagnostics = vec![format!("{what}: {e}")];
    r
}

pub fn run(cmd: &Command) -> Report {
    let r = match cmd {
        Command::Compare { f, g, at, expect } => compare(f, g, at, expect.as_deref()),
        Command::Limit { expr, at } => limit_cmd(expr, at),
        Command::Simplify { expr, at } => expansion(expr, at, false),
        Command::Series { expr, at } => expansion(expr, at, true),
        Command::Scale { target, depth, at } => scale_cmd(target, *depth, at),
        Command::Verify { file } => verify(file),
        Command::Monotone { term, at } => monotone(term, at),
        Command::Demo { iters, .. } => Ok(sqrt2(*iters)),
    };
    r.unwrap_or_else(|r| r)
}

fn compare(f_text: &str, g_text: &str, w: &Where, expect: Option<&str>) -> Result<Report, Report> {
    let s = Setup::new(w)?;
    let want = match expect {
        None => None,
        Some(t) => Some(
            Relation::from_token(t.trim()).ok_or_else(|| Report::usage(format!("--expect: unknown relation '{t}'")))?,
        ),
    };
    let f = s.parse("f", f_text)?;
    let g = s.parse("g", g_text)?;
    let r = relate::compare(&f, &g, &s.point, &s.assume).map_err(|e| Report::error(&e))?;
    let (ft, gt) = (f_text.trim(), g_text.trim());
    let verdict = r.verdict();
    let mut report = Report {
        code: OK,
        verdict: verdict.token().into(),
        lines: vec![format!("{ft} {{rel}} {gt}   [{}]", r.landau_with(ft, gt))],
        relation: Some(verdict),
        magnitude: Some(r.magnitude),
        asymptotic: Some(r.asymptotic),
        close: Some(r.close),
        order: Some(r.order),
        ..Report::default()
    };
    if let Some(rel) = want {
        match relate::relation_holds(rel, &f, &g, &s.point, &s.assume) {
            Ok(true) => {}
            Ok(false) => {
                report.code = FAILED;
                report.diagnostics.push(format!("expected {ft} {rel} {gt}, found {verdict}"));
            }
            Err(e) => {
                report.code = exit_code(&e);
                report.diagnostics.push(format!("--expect {rel}: {e}"));
            }
        }
    }
    Ok(report)
}

fn limit_cmd(text: &str, w: &Where) -> Result<Report, Report> {
    let s = Setup::new(w)?;
    let e = s.parse("expr", text)?;
    match limit::limit(&e, &s.point, &s.assume).map_err(|e| Report::error(&e))? {
        LimitResult::Undetermined(err) => Err(Report::error(&err)),
        l => Ok(Report { verdict: l.to_string(), lines: vec![l.to_string()], ..Report::default() }),
    }
}

fn expansion(text: &str, w: &Where, full: bool) -> Result<Report, Report> {
    let s = Setup::new(w)?;
    let e = s.parse("expr", text)?;
    let g = gnum::expand(&e, &s.point, &s.assume, default_order()).map_err(|e| Report::error(&e))?;
    let rendered = |x: &gnum::GNum| x.render(&s.var).map_err(|e| Report::error(&e));
    if full {
        let series = g.render_series(&s.var).map_err(|e| Report::error(&e))?;
        Ok(Report { verdict: rendered(&g)?, lines: series.clone(), series: Some(series), ..Report::default() })
    } else {
        let lead = rendered(&gnum::absorb(&g))?;
        Ok(Report { verdict: lead.clone(), lines: vec![lead], ..Report::default() })
    }
}

fn scale_cmd(target: &str, depth: usize, at: &str) -> Result<Report, Report> {
    let (var, point) = Point::parse_spec(at).map_err(|e| labelled("--at", &e))?;
    if depth == 0 {
        return Err(Report::usage("--depth must be at least 1"));
    }
    if let Ok(family) = target.parse::<Family>() {
        let sc = scale::standard_scale(family, depth, &point).map_err(|e| Report::error(&e))?;
        let line = sc.render(&var);
        return Ok(Report {
            verdict: line.clone(),
            lines: vec![line],
            series: Some(sc.members.iter().map(|m| print(m, &var, Format::Plain)).collect()),
            ..Report::default()
        });
    }
    let s = Setup::new(&Where { at: at.into(), assume: String::new(), param: Vec::new() })?;
    let e = s.parse("target", target)?;
    let (shifted, moved) = limit::shift_point(&e, &s.point).map_err(|e| Report::error(&e))?;
    let set = scale::mrv(&shifted, &Point::Infinity, &s.assume).map_err(|e| Report::error(&e))?;
    let members: Vec<String> = set.iter().map(|m| s.show(m)).collect();
    let mut lines = vec![format!("mrv: {{{}}}", members.join(", "))];
    if moved {
        lines.push(format!("(in the variable {var} after moving {} to infinity)", s.point));
    }
    Ok(Report { verdict: format!("{{{}}}", members.join(", ")), lines, series: Some(members), ..Report::default() })
}

fn verify(file: &str) -> Result<Report, Report> {
    let text = if file == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).map_err(|e| Report::usage(format!("stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(file).map_err(|e| Report::usage(format!("{file}: {e}")))?
    };
    let chain = parse_chain(&text).map_err(|e| labelled(file, &e))?;
    let report = verify_chain(&chain);
    let lines: Vec<String> = report.to_string().lines().map(str::to_string).collect();
    let (code, verdict) = if report.all_ok() {
        (OK, "OK")
    } else if report.has_fail() {
        (FAILED, "FAIL")
    } else {
        (UNDETERMINED, "undetermined")
    };
    let diagnostics = match report.first_failure() {
        Some(i) => vec![format!("chain rejected at step {}", i + 1)],
        None => Vec::new(),
    };
    Ok(Report { code, verdict: verdict.into(), series: Some(lines.clone()), lines, diagnostics, ..Report::default() })
}

fn monotone(text: &str, w: &Where) -> Result<Report, Report> {
    let s = Setup::new(w)?;
    if s.point != Point::Infinity {
        return Err(Report::usage(format!("monotone needs {}=inf", s.var)));
    }
    let e = s.parse("term", text)?;
    let m = relate::is_monotone_tail(&e, &s.assume).map_err(|e| Report::error(&e))?;
    Ok(Report {
        verdict: m.to_string(),
        lines: vec![format!("{} is eventually {m}", text.trim())],
        ..Report::default()
    })
}

fn sqrt2(iters: usize) -> Report {
    let x = limit::newton_sqrt2_demo(iters);
    let digits = sqrt2_digits(&x);
    let shown = digits + 5;
    let verdict = if digits >= SQRT2_TARGET {
        format!("{SQRT2_TARGET}+ digits verified")
    } else {
        format!("{digits} digits verified")
    };
    Report {
        verdict: verdict.clone(),
        lines: vec![
            format!("x_{iters} = {x}"),
            format!("x_{iters} ~ {}", decimal(&x, shown)),
            format!("sqrt2 ~ {}", sqrt2_reference(shown)),
            format!("{verdict} ({digits} correct digits)"),
        ],
        ..Report::default()
    }
}
