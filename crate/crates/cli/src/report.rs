//! Reports: an ordered list of fields, checks and verdicts rendered either as
//! aligned text or as `key=value` lines.

use std::fmt::Write as _;

use clap::ValueEnum;

use idcenter::quasidecomp::Check;
use idcenter::{Operator, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

pub const FORMAT_TAG: &str = "idcenter-report-1";

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(usize),
    Float(f64),
    Text(String),
    Vector(Vec<f64>),
    /// Row-major.
    Matrix(Vec<Vec<f64>>),
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<&Vector> for Value {
    fn from(v: &Vector) -> Self {
        Value::Vector(v.as_slice().to_vec())
    }
}

impl From<&Operator> for Value {
    fn from(op: &Operator) -> Self {
        Value::Matrix(op.rows())
    }
}

fn join(xs: &[f64], sep: &str) -> String {
    xs.iter().map(|x| float(*x)).collect::<Vec<_>>().join(sep)
}

impl Value {
    fn machine(&self) -> String {
        match self {
            Value::Int(n) => n.to_string(),
            Value::Float(x) => float(*x),
            Value::Text(s) => s.clone(),
            Value::Vector(v) => join(v, ","),
            Value::Matrix(rows) => rows.iter().map(|r| join(r, ",")).collect::<Vec<_>>().join(";"),
        }
    }

    fn text(&self) -> String {
        match self {
            Value::Vector(v) => format!("[{}]", join(v, ", ")),
            Value::Matrix(rows) => {
                let rows: Vec<String> = rows.iter().map(|r| format!("[{}]", join(r, ", "))).collect();
                format!("[{}]", rows.join(", "))
            }
            other => other.machine(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Entry {
    Section(String),
    Field {
        key: String,
        value: Value,
    },
    Check {
        key: String,
        value: f64,
        tol: f64,
        passed: bool,
    },
    Verdict {
        key: String,
        label: String,
        positive: bool,
        tol: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    command: String,
    digest: String,
    tolerances: Vec<(String, f64)>,
    entries: Vec<Entry>,
}

impl Report {
    pub fn new(command: String, digest: String) -> Self {
        Self {
            command,
            digest,
            tolerances: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.push((name.to_string(), value));
    }

    pub fn section(&mut self, name: &str) {
        self.entries.push(Entry::Section(name.to_string()));
    }

    pub fn field(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.entries.push(Entry::Field {
            key: key.into(),
            value: value.into(),
        });
    }

    /// Records `value <= tol`; NaN fails.
    pub fn check(&mut self, key: impl Into<String>, value: f64, tol: f64) -> bool {
        let passed = value <= tol;
        self.entries.push(Entry::Check {
            key: key.into(),
            value,
            tol,
            passed,
        });
        passed
    }

    pub fn library_check(&mut self, prefix: &str, c: &Check) {
        self.entries.push(Entry::Check {
            key: format!("{prefix}.{}", slug(&c.name)),
            value: c.value,
            tol: c.tolerance,
            passed: c.passed,
        });
    }

    pub fn verdict(&mut self, key: impl Into<String>, label: &str, positive: bool, tol: f64) {
        self.entries.push(Entry::Verdict {
            key: key.into(),
            label: label.to_string(),
            positive,
            tol,
        });
    }

    /// True when every check passed and every verdict is positive.
    pub fn all_positive(&self) -> bool {
        self.entries.iter().all(|e| match e {
            Entry::Check { passed, .. } => *passed,
            Entry::Verdict { positive, .. } => *positive,
            _ => true,
        })
    }

    fn outcome(&self) -> &'static str {
        if self.all_positive() {
            "ok"
        } else {
            "obstruction"
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => self.render_machine(),
            Format::Text => self.render_text(),
        }
    }

    fn render_machine(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("format", FORMAT_TAG);
        line("command", &self.command);
        line("inputs.sha256", &self.digest);
        for (name, v) in &self.tolerances {
            line(&format!("tol.{name}"), &float(*v));
        }
        for e in &self.entries {
            match e {
                Entry::Section(_) => {}
                Entry::Field { key, value } => line(key, &value.machine()),
                Entry::Check { key, value, tol, passed } => {
                    line(key, &float(*value));
                    line(&format!("{key}.tol"), &float(*tol));
                    line(&format!("{key}.pass"), &passed.to_string());
                }
                Entry::Verdict {
                    key,
                    label,
                    positive,
                    tol,
                } => {
                    line(key, label);
                    line(&format!("{key}.tol"), &float(*tol));
                    line(&format!("{key}.positive"), &positive.to_string());
                }
            }
        }
        line("outcome", self.outcome());
        out
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "idcenter report ({FORMAT_TAG})");
        let _ = writeln!(out, "  command  {}", self.command);
        let _ = writeln!(out, "  inputs   sha256 {}", self.digest);
        if !self.tolerances.is_empty() {
            let _ = writeln!(out, "  tolerances");
            for (name, v) in &self.tolerances {
                let _ = writeln!(out, "    {name:<20} {}", float(*v));
            }
        }
        for e in &self.entries {
            match e {
                Entry::Section(name) => {
                    let _ = writeln!(out, "\n[{name}]");
                }
                Entry::Field { key, value } => {
                    let _ = writeln!(out, "  {key:<28} {}", value.text());
                }
                Entry::Check { key, value, tol, passed } => {
                    let mark = if *passed { "pass" } else { "FAIL" };
                    let _ = writeln!(out, "  {key:<28} {} <= {}  {mark}", float(*value), float(*tol));
                }
                Entry::Verdict {
                    key,
                    label,
                    positive,
                    tol,
                } => {
                    let mark = if *positive { "" } else { "  (negative)" };
                    let _ = writeln!(out, "  {key:<28} {label} at tol {}{mark}", float(*tol));
                }
            }
        }
        let _ = writeln!(out, "\noutcome  {}", self.outcome());
        out
    }
}

/// Lowercase key fragment made of `[a-z0-9_]`.
pub fn slug(name: &str) -> String {
    let mut s = String::with_capacity(name.len());
    let mut gap = false;
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            if gap && !s.is_empty() {
                s.push('_');
            }
            gap = false;
            s.push(c.to_ascii_lowercase());
        } else {
            gap = true;
        }
    }
    s
}
