use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn gossamer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gossamer"))
        .args(args)
        .env_remove("GOSSAMER_MAX_TERMS")
        .output()
        .expect("spawn gossamer")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim_end().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn chain(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "chains", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut a = args.to_vec();
    a.push("--json");
    let o = gossamer(&a);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}: {}", stdout(&o)));
    (v, code(&o))
}

#[test]
fn compare_prints_token_and_landau_gloss() {
    let o = gossamer(&["compare", "ln(x)", "x^a", "--at", "x=inf", "--assume", "a>0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ln(x) prec x^a   [ln(x) = o(x^a)]");
}

#[test]
fn limit_prints_exact_value() {
    let o = gossamer(&["limit", "(3*n+5)/(5*n)", "--at", "n=inf"]);
    assert_eq!((code(&o), stdout(&o)), (0, "3/5".to_string()));
}

#[test]
fn sqrt2_demo_reaches_47_digits() {
    let o = gossamer(&["demo", "sqrt2", "--iters", "5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("x_5 = 1572584048032918633353217/1111984844349868137938112"), "{out}");
    assert!(out.contains("47+ digits verified"), "{out}");
    let fewer = stdout(&gossamer(&["demo", "sqrt2", "--iters", "2"]));
    assert!(fewer.ends_with("5 digits verified (5 correct digits)"), "{fewer}");
}

#[test]
fn json_has_every_field_and_round_trips() {
    let (v, c) = json(&["compare", "x", "x+1", "--at", "x=inf"]);
    assert_eq!(c, 0);
    for key in ["verdict", "magnitude", "asymptotic", "close", "order", "diagnostics"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    assert_eq!(v["verdict"], "sim");
    assert_eq!(v["magnitude"], "propto");
    assert_eq!(v["asymptotic"], true);
    assert_eq!(v["close"], false);
    assert_eq!(v["order"], "lt");
    let again: Value = serde_json::from_str(&v.to_string()).unwrap();
    assert_eq!(again, v);

    let (s, _) = json(&["series", "1/(1-x)", "--at", "x=0+", "--terms", "3"]);
    assert_eq!(s["series"], serde_json::json!(["1", "x", "x^2", "+ O(x^3)"]));
}

/// Invocations with their expected exit code.
const CORPUS: &[(&[&str], i32)] = &[
    (&["compare", "exp(x)", "x^Delta", "--at", "x=inf", "--assume", "Delta>0"], 0),
    (&["compare", "n^n*n", "exp(n)*fact(n)", "--at", "n=inf"], 0),
    (&["compare", "ln(x)^b", "x^a", "--at", "x=inf", "--assume", "a>0, b>0"], 0),
    (&["compare", "x^b", "exp(a*x)", "--at", "x=inf", "--assume", "a>0, b>0"], 0),
    (&["limit", "x^alpha*ln(x)", "--at", "x=0+", "--assume", "alpha>0"], 0),
    (&["compare", "x^n", "n", "--at", "n=inf", "--assume", "x>0, x<1"], 0),
    (&["limit", "(x^2-a^2)/(x^2+2*a*x+a^2)", "--at", "x=0", "--assume", "a != 0"], 0),
    (&["limit", "(a^x - b^x)/x", "--at", "x=0"], 0),
    (&["limit", "(1-2^x)^x", "--at", "x=0-"], 0),
    (&["compare", "v", "ln(v)", "--at", "v=0+"], 0),
    (&["limit", "u/(u^2+1)^(1/2)", "--at", "u=inf"], 0),
    (&["compare", "ln(ln(x^3 + 2*x))", "ln(ln(5*x^2 + 1))", "--at", "x=inf"], 0),
    (&["monotone", "1/n^2", "--at", "n=inf"], 0),
    (&["simplify", "x^2 + x + ln(x)", "--at", "x=inf"], 0),
    (&["series", "exp(x)", "--at", "x=0"], 0),
    (&["scale", "logs", "--depth", "3"], 0),
    (&["compare", "x", "x+1", "--at", "x=inf", "--expect", "gt"], 1),
    (&["limit", "x", "--at", "x=0", "--assume", "a>0, a<0"], 1),
    (&["compare", "x", "x+", "--at", "x=inf"], 2),
    (&["compare", "x", "y", "--at", "x=inf", "--param", "a"], 2),
    (&["limit", "x", "--at", "x"], 2),
    (&["compare", "x^(a-1)", "1", "--at", "x=inf"], 3),
    (&["limit", "x^(a-1)", "--at", "x=inf"], 3),
    (&["monotone", "n^(a-1)", "--at", "n=inf"], 3),
];

#[test]
fn exit_codes_match_on_the_corpus() {
    for (args, want) in CORPUS {
        let o = gossamer(args);
        assert_eq!(code(&o), *want, "{args:?}\nstdout: {}\nstderr: {}", stdout(&o), stderr(&o));
        let (_, jc) = json(args);
        assert_eq!(jc, *want, "{args:?} with --json");
    }
}

#[test]
fn plain_and_json_verdicts_agree() {
    for (args, want) in CORPUS.iter().filter(|(_, c)| *c == 0) {
        let plain = stdout(&gossamer(args));
        let (v, _) = json(args);
        let verdict = v["verdict"].as_str().unwrap().to_string();
        match args[0] {
            "compare" => {
                let token = plain.strip_prefix(args[1]).unwrap().split_whitespace().next().unwrap();
                assert_eq!(token, verdict, "{args:?}");
            }
            "limit" | "simplify" | "scale" => assert_eq!(plain, verdict, "{args:?}"),
            "series" => {
                let lines: Vec<Value> = plain.lines().map(Value::from).collect();
                assert_eq!(v["series"], Value::from(lines), "{args:?}");
            }
            "monotone" => assert!(plain.ends_with(&verdict), "{args:?}"),
            other => panic!("no agreement rule for {other} ({want})"),
        }
    }
}

#[test]
fn undetermined_names_the_sign_query() {
    let o = gossamer(&["compare", "x^(a-1)", "1", "--at", "x=inf"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("sign of a - 1"), "{}", stderr(&o));
    let (v, _) = json(&["compare", "x^(a-1)", "1", "--at", "x=inf"]);
    assert_eq!(v["verdict"], "undetermined");
    assert!(v["diagnostics"][0].as_str().unwrap().contains("a - 1"));
    let m = gossamer(&["monotone", "n^(a-1)", "--at", "n=inf"]);
    assert!(stderr(&m).contains("sign of a - 1 is unknown"), "{}", stderr(&m));
}

#[test]
fn parse_errors_point_at_the_offending_input() {
    let o = gossamer(&["compare", "x", "x+", "--at", "x=inf"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("g: parse error at byte 2"), "{}", stderr(&o));
}

#[test]
fn point_spec_is_required() {
    for cmd in ["limit", "simplify", "series", "monotone"] {
        let o = gossamer(&[cmd, "x"]);
        assert_eq!(code(&o), 2, "{cmd}");
        assert!(stderr(&o).contains("--at"), "{cmd}: {}", stderr(&o));
    }
    assert_eq!(code(&gossamer(&["monotone", "1/n", "--at", "n=0+"])), 2);
}

#[test]
fn unicode_symbols_replace_tokens() {
    let o = gossamer(&["compare", "x^2", "x", "--at", "x=inf", "--unicode"]);
    assert_eq!(stdout(&o), "x^2 ≻ x   [x = o(x^2)]");
}

#[test]
fn truncation_follows_flag_then_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_gossamer"));
        c.args(["series", "exp(x)", "--at", "x=0+"]).args(extra).env_remove("GOSSAMER_MAX_TERMS");
        if let Some(v) = env {
            c.env("GOSSAMER_MAX_TERMS", v);
        }
        stdout(&c.output().unwrap()).lines().count()
    };
    assert_eq!(run(None, &[]), 9);
    assert_eq!(run(Some("3"), &[]), 4);
    assert_eq!(run(Some("3"), &["--terms", "5"]), 6);
}

#[test]
fn chain_files_verify() {
    for name in ["exp-beats-power.chain", "division-keeps-succ.chain", "derivative-chain.chain"] {
        let o = gossamer(&["verify", &chain(name)]);
        assert_eq!(code(&o), 0, "{name}: {}", stdout(&o));
        assert!(stdout(&o).lines().all(|l| l.contains(": OK")), "{name}");
    }
}

#[test]
fn wrong_chain_is_rejected_at_its_first_step() {
    let o = gossamer(&["verify", &chain("square-beats-exp.chain")]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.starts_with("step 1 (line 2): FAIL: contradiction: 2*ln(n) lt n"), "{out}");
    assert!(stderr(&o).contains("chain rejected at step 1"));
    let (v, _) = json(&["verify", &chain("square-beats-exp.chain")]);
    assert_eq!(v["verdict"], "FAIL");
}

#[test]
fn undecidable_chain_exits_3() {
    let o = gossamer(&["verify", &chain("needs-assumption.chain")]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("undetermined: assumption needed"));
}

#[test]
fn verify_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gossamer"))
        .args(["verify", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"x^2 ; succ ; x ; at x=inf ; by solve\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "step 1 (line 1): OK   [x^2 succ x]");
}

#[test]
fn missing_chain_file_is_a_usage_error() {
    assert_eq!(code(&gossamer(&["verify", "/nonexistent/chain"])), 2);
}

#[test]
fn scale_lists_members_in_order() {
    let o = gossamer(&["scale", "powers", "--depth", "3"]);
    assert_eq!(stdout(&o), "x << x^2 << x^3");
    let m = gossamer(&["scale", "exp(x) + x^2*exp(x^2)", "--at", "x=inf"]);
    assert_eq!(stdout(&m), "mrv: {exp(x^2)}");
}
