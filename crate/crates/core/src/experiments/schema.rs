//! Structural validation of experiment reports, with JSON-pointer paths.

use std::fmt;
use std::path::Path;

use serde_json::Value;

use super::ExperimentName;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pointer, self.message)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, pointer: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            pointer: pointer.into(),
            message: message.into(),
        });
    }

    fn field<'a>(&mut self, obj: &'a serde_json::Map<String, Value>, base: &str, key: &str) -> Option<&'a Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.push(format!("{base}/{key}"), "missing");
        }
        v
    }

    fn object<'a>(&mut self, v: &'a Value, pointer: &str) -> Option<&'a serde_json::Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.push(pointer, "expected an object");
        }
        o
    }
}

fn is_hex64(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// Every structural problem of a parsed report; empty means valid.
pub fn report_schema_validate(report: &Value) -> Vec<Violation> {
    let mut c = Collector(Vec::new());
    let Some(root) = c.object(report, "") else {
        return c.0;
    };

    if let Some(meta) = c.field(root, "", "meta").and_then(|m| c.object(m, "/meta")) {
        if let Some(e) = c.field(meta, "/meta", "experiment") {
            let ok = e.as_str().is_some_and(|s| s.parse::<ExperimentName>().is_ok());
            if !ok {
                c.push("/meta/experiment", "expected a known experiment name");
            }
        }
        if let Some(h) = c.field(meta, "/meta", "hash") {
            if !h.as_str().is_some_and(is_hex64) {
                c.push("/meta/hash", "expected 64 lowercase hex digits");
            }
        }
        for key in ["seed", "threads"] {
            if let Some(v) = c.field(meta, "/meta", key) {
                if !v.is_u64() {
                    c.push(format!("/meta/{key}"), "expected a non-negative integer");
                }
            }
        }
        if let Some(v) = c.field(meta, "/meta", "version") {
            if !v.is_string() {
                c.push("/meta/version", "expected a string");
            }
        }
    }

    if let Some(cfg) = c.field(root, "", "config") {
        c.object(cfg, "/config");
    }
    if let Some(r) = c.field(root, "", "results") {
        if !(r.is_object() || r.is_array()) {
            c.push("/results", "expected an object or array");
        }
    }

    let mut all_pass = None;
    if let Some(checks) = c.field(root, "", "checks") {
        match checks.as_array() {
            None => c.push("/checks", "expected an array"),
            Some(list) => {
                let mut every = !list.is_empty();
                for (i, item) in list.iter().enumerate() {
                    let base = format!("/checks/{i}");
                    let Some(o) = c.object(item, &base) else {
                        every = false;
                        continue;
                    };
                    if let Some(n) = c.field(o, &base, "name") {
                        if !n.as_str().is_some_and(|s| !s.is_empty()) {
                            c.push(format!("{base}/name"), "expected a non-empty string");
                        }
                    }
                    if let Some(v) = c.field(o, &base, "value") {
                        if !(v.is_null() || v.is_number()) {
                            c.push(format!("{base}/value"), "expected a number or null");
                        }
                    }
                    if let Some(t) = c.field(o, &base, "threshold") {
                        if !t.is_number() {
                            c.push(format!("{base}/threshold"), "expected a number");
                        }
                    }
                    if let Some(cmp) = c.field(o, &base, "comparison") {
                        if !matches!(cmp.as_str(), Some("<=") | Some(">=")) {
                            c.push(format!("{base}/comparison"), "expected \"<=\" or \">=\"");
                        }
                    }
                    match c.field(o, &base, "pass").map(|p| p.as_bool()) {
                        Some(Some(p)) => every &= p,
                        Some(None) => {
                            c.push(format!("{base}/pass"), "expected a boolean");
                            every = false;
                        }
                        None => every = false,
                    }
                }
                all_pass = Some(every);
            }
        }
    }

    if let Some(p) = c.field(root, "", "pass") {
        match (p.as_bool(), all_pass) {
            (None, _) => c.push("/pass", "expected a boolean"),
            (Some(p), Some(all)) if p != all => {
                c.push("/pass", format!("is {p} but the checks say {all}"));
            }
            _ => {}
        }
    }
    c.0
}

/// Parse and validate a report file. Unparseable input is an error; a
/// parsed report yields its violations.
pub fn validate_report_file(path: &Path) -> Result<Vec<Violation>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let v: Value = serde_json::from_str(&text)?;
    Ok(report_schema_validate(&v))
}
