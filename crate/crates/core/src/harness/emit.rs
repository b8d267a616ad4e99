//! Run reports and their serialization.
//!
//! Float rule: every float is written as `{:.16e}` (17 significant digits,
//! round-trip exact); non-finite floats become `null` in JSON and the literal
//! `inf`/`-inf`/`NaN` in CSV and text. Object keys are sorted. Wall time is
//! kept out of JSON and CSV so that reports of identical runs are
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::carleson::CarlesonTable;
use crate::error::Result;
use crate::report::{VerificationReport, Witness};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub values: BTreeMap<String, f64>,
    /// Present on every failure.
    pub witness: Option<Witness>,
    pub note: Option<String>,
    /// Measured runtime of checks with a time budget; kept out of reports.
    #[serde(skip)]
    pub elapsed_seconds: Option<f64>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            values: BTreeMap::new(),
            witness: None,
            note: None,
            elapsed_seconds: None,
        }
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    /// A failed check carrying the error that stopped it.
    pub fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        let msg = err.to_string();
        Self::new(name, false).witness(Witness::new(msg.clone())).note(msg)
    }

    pub fn from_report(r: &VerificationReport) -> Self {
        let mut c = Self::new(r.check.clone(), r.pass)
            .value("worst_ratio", r.worst_ratio)
            .value("threshold", r.threshold)
            .value("samples", r.samples as f64)
            .value("skipped", r.skipped as f64);
        for (k, v) in &r.extras {
            c.values.insert(k.clone(), *v);
        }
        c.witness = r.witness.clone();
        if !c.pass && c.witness.is_none() {
            c.witness = Some(Witness::new(format!("{} exceeded its threshold", r.check)));
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub checks: Vec<CheckResult>,
    /// Command-specific outputs.
    pub results: BTreeMap<String, Value>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time_seconds: f64,
    /// Written instead of the generic CSV when present.
    #[serde(skip)]
    pub table: Option<CarlesonTable>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, seed: u64, config: Value) -> Self {
        Self {
            command: command.into(),
            seed,
            config,
            checks: Vec::new(),
            results: BTreeMap::new(),
            pass: true,
            wall_time_seconds: 0.0,
            table: None,
        }
    }

    pub fn push(&mut self, c: CheckResult) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("plain data serializes");
        self.results.insert(key.to_string(), v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let f = n.as_f64().expect("f64 number");
                out.push_str(&if f.is_finite() { format_float(f) } else { "null".into() });
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Object(o) => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = o.keys().collect();
            keys.sort();
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_json(out, &o[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Leaves of a JSON tree as `(dotted path, scalar text)`.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => {
            let mut keys: Vec<&String> = o.keys().collect();
            keys.sort();
            for k in keys {
                flatten(&join(k), &o[k], out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::Number(n) if n.is_f64() => out.push((prefix.to_string(), format_float(n.as_f64().expect("f64")))),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn text(report: &RunReport) -> String {
    let mut s = String::new();
    let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "command {} seed {}: {}", report.command, report.seed, verdict(report.pass));
    for c in &report.checks {
        let _ = write!(s, "  [{}] {}", verdict(c.pass), c.name);
        for (k, v) in &c.values {
            let _ = write!(s, " {k}={}", format_float(*v));
        }
        s.push('\n');
        if let Some(n) = &c.note {
            let _ = writeln!(s, "      note: {n}");
        }
        if !c.pass {
            if let Some(w) = &c.witness {
                let _ = write!(s, "      witness: {}", w.description);
                for (k, v) in &w.values {
                    let _ = write!(s, " {k}={}", format_float(*v));
                }
                s.push('\n');
            }
        }
    }
    let mut rows = Vec::new();
    flatten("", &serde_json::to_value(&report.results).expect("serializable"), &mut rows);
    for (k, v) in rows {
        let _ = writeln!(s, "  {k} = {v}");
    }
    let _ = writeln!(s, "  wall_time_seconds = {:.3}", report.wall_time_seconds);
    s
}

/// Serializes a report. JSON: the full report with sorted keys. CSV: the
/// Carleson table when the report carries one, otherwise `path,value` rows
/// of the flattened report. Text: one line per check.
pub fn emit(report: &RunReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = String::new();
            write_json(&mut s, &serde_json::to_value(report).expect("serializable"), 0);
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut buf = Vec::new();
            if let Some(t) = &report.table {
                t.write_csv(&mut buf)?;
                return Ok(buf);
            }
            let mut rows = Vec::new();
            flatten("", &serde_json::to_value(report).expect("serializable"), &mut rows);
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["path", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            w.flush()?;
            drop(w);
            Ok(buf)
        }
        Format::Text => Ok(text(report).into_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut r = RunReport::new("probe", 3, serde_json::json!({"seed": 3, "b": {"z": 1.5, "a": [0.1, 2]}}));
        r.push(CheckResult::new("ok", true).value("ratio", 0.1));
        r.push(CheckResult::failed("broken", "no good cubes"));
        r.result("estimates", vec![1.0, f64::INFINITY]);
        r
    }

    #[test]
    fn empty_report_is_a_valid_document() {
        let r = RunReport::new("suite", 0, Value::Null);
        let text = String::from_utf8(emit(&r, Format::Json).unwrap()).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["checks"], serde_json::json!([]));
        assert_eq!(v["pass"], Value::Bool(true));
    }

    #[test]
    fn floats_use_seventeen_digits_and_sorted_keys() {
        let text = String::from_utf8(emit(&sample(), Format::Json).unwrap()).unwrap();
        assert!(text.contains("\"ratio\": 1.0000000000000001e-1"), "{text}");
        assert!(text.contains("null"));
        let a = text.find("\"a\"").unwrap();
        let z = text.find("\"z\"").unwrap();
        assert!(a < z);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["checks"][0]["values"]["ratio"].as_f64(), Some(0.1));
    }

    #[test]
    fn emission_is_deterministic() {
        for f in [Format::Json, Format::Csv, Format::Text] {
            assert_eq!(emit(&sample(), f).unwrap(), emit(&sample(), f).unwrap());
        }
    }

    #[test]
    fn csv_rows_are_flattened_paths() {
        let text = String::from_utf8(emit(&sample(), Format::Csv).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("path,value"));
        assert!(text.contains("checks.0.values.ratio,1.0000000000000001e-1"));
        assert!(text.contains("results.estimates.1,inf") || text.contains("results.estimates.1,null"));
    }

    #[test]
    fn failures_carry_a_witness() {
        let r = sample();
        assert!(!r.pass);
        assert!(r.checks.iter().filter(|c| !c.pass).all(|c| c.witness.is_some()));
    }
}
