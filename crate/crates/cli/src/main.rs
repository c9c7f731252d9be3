//! `gossamer`: compare growth, expand, take limits and check derivation
//! chains from the command line.

mod report;
mod run;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "gossamer", version, about = "Magnitude comparison, multiseries expansion and limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Emit one JSON object instead of plain text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Use UTF-8 relation symbols in plain output.
    #[arg(long, global = true)]
    pub unicode: bool,

    /// Truncation budget (terms per expansion); overrides GOSSAMER_MAX_TERMS.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..=64))]
    pub terms: Option<u32>,
}

/// Point, assumptions and parameter declarations shared by the
/// expression subcommands.
#[derive(Args, Debug, Clone)]
pub struct Where {
    /// Point spec such as `x=inf`, `x=0+`, `n=2-`; names the main variable.
    #[arg(long, value_name = "VAR=POINT")]
    pub at: String,

    /// Comma separated constraints, e.g. "a>0, mu+v<1".
    #[arg(long, value_name = "CONSTRAINTS", default_value = "")]
    pub assume: String,

    /// Declare parameter names; any other identifier is then rejected.
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    pub param: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compare the growth of two expressions at a point.
    Compare {
        f: String,
        g: String,
        #[command(flatten)]
        at: Where,
        /// Exit 1 unless this relation holds (token such as `prec`, `sim`, `lt`).
        #[arg(long, value_name = "REL")]
        expect: Option<String>,
    },
    /// Limit of an expression at a point.
    Limit {
        expr: String,
        #[command(flatten)]
        at: Where,
    },
    /// Leading term of the expansion at a point.
    Simplify {
        expr: String,
        #[command(flatten)]
        at: Where,
    },
    /// Truncated multiseries at a point, one term per line.
    Series {
        expr: String,
        #[command(flatten)]
        at: Where,
    },
    /// A standard scale (powers, exp-towers, logs, mixed) or the most
    /// rapidly varying subexpressions of an expression.
    Scale {
        target: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_name = "VAR=POINT", default_value = "x=inf")]
        at: String,
    },
    /// Check a derivation chain file (`-` reads stdin).
    Verify { file: String },
    /// Eventual monotonicity of a sequence term.
    Monotone {
        term: String,
        #[command(flatten)]
        at: Where,
    },
    /// Built-in demonstrations.
    Demo {
        #[arg(value_parser = ["sqrt2"])]
        name: String,
        #[arg(long, default_value_t = 5)]
        iters: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.terms {
        // read by the engine's default truncation; set before any work starts
        std::env::set_var("GOSSAMER_MAX_TERMS", n.to_string());
    }
    let report = run::run(&cli.command);
    let (out, err) = report.render(cli.json, cli.unicode);
    if !out.is_empty() {
        println!("{out}");
    }
    if !err.is_empty() {
        eprintln!("{err}");
    }
    ExitCode::from(report.code)
}
