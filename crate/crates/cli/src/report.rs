use gossamer_core::{Error, Order, Relation};
use serde_json::{json, Value};

pub const OK: u8 = 0;
pub const FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const UNDETERMINED: u8 = 3;

/// Outcome of one subcommand, renderable as plain text or JSON.
#[derive(Debug, Default)]
pub struct Report {
    pub code: u8,
    pub verdict: String,
    /// Plain output lines; `{rel}` is replaced by the verdict relation.
    pub lines: Vec<String>,
    pub relation: Option<Relation>,
    pub magnitude: Option<Relation>,
    pub asymptotic: Option<bool>,
    pub close: Option<bool>,
    pub order: Option<Order>,
    pub series: Option<Vec<String>>,
    pub diagnostics: Vec<String>,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_undetermined() => UNDETERMINED,
        Error::Parse(_) => USAGE,
        _ => FAILED,
    }
}

impl Report {
    pub fn usage(msg: impl Into<String>) -> Report {
        Report { code: USAGE, verdict: "error".into(), diagnostics: vec![msg.into()], ..Report::default() }
    }

    pub fn error(e: &Error) -> Report {
        let code = exit_code(e);
        Report {
            code,
            verdict: if code == UNDETERMINED { "undetermined" } else { "error" }.into(),
            diagnostics: vec![e.to_string()],
            ..Report::default()
        }
    }

    pub fn json(&self) -> Value {
        let mut v = json!({
            "verdict": self.verdict,
            "magnitude": self.magnitude.map(Relation::token),
            "asymptotic": self.asymptotic,
            "close": self.close,
            "order": self.order.map(Order::token),
            "diagnostics": self.diagnostics,
        });
        if let Some(s) = &self.series {
            v["series"] = json!(s);
        }
        v
    }

    /// Stdout and stderr text.
    pub fn render(&self, as_json: bool, unicode: bool) -> (String, String) {
        if as_json {
            return (self.json().to_string(), String::new());
        }
        let rel = self.relation.map(|r| if unicode { r.symbol() } else { r.token() }).unwrap_or_default();
        let out = self.lines.iter().map(|l| l.replace("{rel}", rel)).collect::<Vec<_>>().join("\n");
        let err = self.diagnostics.iter().map(|d| format!("gossamer: {d}")).collect::<Vec<_>>().join("\n");
        (out, err)
    }
}
