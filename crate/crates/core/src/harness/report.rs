use serde::Serialize;

use crate::error::{Error, Result};

use super::checks::{Bound, CheckReport};
use super::config::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub family: String,
    pub metric: String,
    pub dim: usize,
    pub seed: u64,
    pub x_samples: usize,
    pub directions: usize,
    pub domain_margin: f64,
    pub result: String,
    /// The only field that varies between identical runs.
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub header: Header,
    pub checks: Vec<CheckReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Txt => Ok(self.txt()),
            Format::JsonLines => {
                let mut out = String::new();
                out.push_str(&json_line("header", &self.header)?);
                for c in &self.checks {
                    out.push_str(&json_line("check", c)?);
                }
                Ok(out)
            }
            Format::Csv => self.csv(),
        }
    }

    /// TOML text with floats in scientific notation.
    fn txt(&self) -> String {
        let h = &self.header;
        let mut t = TomlText::default();
        t.line("[header]");
        t.str("family", &h.family);
        t.str("metric", &h.metric);
        t.int("dim", h.dim as u64);
        t.int("seed", h.seed);
        t.int("x_samples", h.x_samples as u64);
        t.int("directions", h.directions as u64);
        t.float("domain_margin", h.domain_margin);
        t.str("result", &h.result);
        t.float("wall_time_s", h.wall_time_s);
        for c in &self.checks {
            t.line("");
            t.line("[[checks]]");
            t.str("name", &c.name);
            t.str("verdict", &c.verdict);
            match c.outcome {
                Some(o) => t.bool("outcome", o),
                None => t.str("outcome", "undecided"),
            }
            t.bool("expected", c.expected);
            t.bool("passed", c.passed);
            let notes: Vec<String> = c.notes.iter().map(|n| quote(n)).collect();
            t.line(&format!("notes = [{}]", notes.join(", ")));
            for i in &c.items {
                t.line("");
                t.line("[[checks.items]]");
                t.str("key", &i.key);
                t.str("bound", bound_name(i.bound));
                t.float("value", i.value);
                t.float("mean", i.mean);
                t.int("count", i.count as u64);
                if let Some(tol) = i.tol {
                    t.float("tol", tol);
                }
                if let Some(ok) = i.ok {
                    t.bool("ok", ok);
                }
                if i.hard {
                    t.bool("hard", true);
                }
                t.str("at", &i.at);
            }
        }
        t.0
    }

    fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let map = |e: csv::Error| Error::Config(format!("report serialization: {e}"));
        w.write_record([
            "check", "verdict", "passed", "item", "bound", "value", "mean", "count", "tol", "ok",
            "hard", "at",
        ])
        .map_err(map)?;
        for c in &self.checks {
            let passed = c.passed.to_string();
            if c.items.is_empty() {
                w.write_record([
                    c.name.as_str(),
                    c.verdict.as_str(),
                    passed.as_str(),
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                ])
                .map_err(map)?;
            }
            for i in &c.items {
                let bound = bound_name(i.bound).to_string();
                w.write_record([
                    c.name.clone(),
                    c.verdict.clone(),
                    passed.clone(),
                    i.key.clone(),
                    bound,
                    format!("{:e}", i.value),
                    format!("{:e}", i.mean),
                    i.count.to_string(),
                    i.tol.map(|t| format!("{t:e}")).unwrap_or_default(),
                    i.ok.map(|b| b.to_string()).unwrap_or_default(),
                    i.hard.to_string(),
                    i.at.clone(),
                ])
                .map_err(map)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

fn bound_name(b: Bound) -> &'static str {
    match b {
        Bound::Max => "max",
        Bound::Min => "min",
        Bound::Info => "info",
    }
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

#[derive(Default)]
struct TomlText(String);

impl TomlText {
    fn line(&mut self, l: &str) {
        self.0.push_str(l);
        self.0.push('\n');
    }

    fn str(&mut self, k: &str, v: &str) {
        self.line(&format!("{k} = {}", quote(v)));
    }

    fn int(&mut self, k: &str, v: u64) {
        self.line(&format!("{k} = {v}"));
    }

    fn bool(&mut self, k: &str, v: bool) {
        self.line(&format!("{k} = {v}"));
    }

    fn float(&mut self, k: &str, v: f64) {
        let text = if v.is_nan() {
            "nan".to_string()
        } else if v.is_infinite() {
            if v > 0.0 { "inf" } else { "-inf" }.to_string()
        } else {
            format!("{v:e}")
        };
        self.line(&format!("{k} = {text}"));
    }
}

pub(crate) fn json_line<T: Serialize>(record: &str, value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?;
    if let serde_json::Value::Object(m) = &mut v {
        m.insert("record".into(), serde_json::Value::String(record.into()));
    }
    Ok(format!("{v}\n"))
}

/// Blanks the wall-time value so renderings of identical runs compare equal.
pub fn strip_timing(rendered: &str) -> String {
    const KEY: &str = "wall_time_s";
    let mut out = String::with_capacity(rendered.len());
    let mut rest = rendered;
    while let Some(pos) = rest.find(KEY) {
        let (head, tail) = rest.split_at(pos + KEY.len());
        out.push_str(head);
        let sep = tail.len() - tail.trim_start_matches(['"', ' ', '=', ':']).len();
        out.push_str(&tail[..sep]);
        let num = tail[sep..]
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+')))
            .unwrap_or(tail.len() - sep);
        out.push('_');
        rest = &tail[sep + num..];
    }
    out.push_str(rest);
    out
}
