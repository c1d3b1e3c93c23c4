//! Run manifests and the shared report format: a JSON object holding the
//! manifest, an overall verdict, and command-specific results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const FORMAT: &str = "tubewha-report/1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    /// subcommand name
    pub command: String,
    /// full argument vector, replayed by `--verify-manifest`
    pub argv: Vec<String>,
    pub category: Option<String>,
    pub category_hash: Option<String>,
    pub fconvention: Option<String>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_times: BTreeMap<String, f64>,
    pub summary: BTreeMap<String, Value>,
}

impl Manifest {
    pub fn new(command: &str, argv: &[String], seed: u64) -> Self {
        Manifest {
            format: FORMAT.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: argv.to_vec(),
            category: None,
            category_hash: None,
            fconvention: None,
            seed,
            tolerances: BTreeMap::new(),
            wall_times: BTreeMap::new(),
            summary: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub manifest: Manifest,
    pub pass: bool,
    pub results: Value,
    /// human-readable rendering; not serialised
    #[serde(skip)]
    pub text: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Pass/fail of one named check against its tolerance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
    /// informational rows are reported but never fail the run
    #[serde(default = "yes")]
    pub asserted: bool,
}

// JSON has no infinities; an unbounded residual is stored as f64::MAX
fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

fn yes() -> bool {
    true
}

impl Check {
    /// Passes when `value < tol`.
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        let value = finite(value);
        Check { name: name.into(), value, tol, pass: value < tol, asserted: true }
    }
    /// Passes when `value > tol`.
    pub fn above(name: impl Into<String>, value: f64, tol: f64) -> Self {
        let value = finite(value);
        Check { name: name.into(), value, tol, pass: value > tol, asserted: true }
    }
    /// Demotes the check to a reported value.
    pub fn info(mut self) -> Self {
        self.asserted = false;
        self
    }
    pub fn exact(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 0.0 } else { 1.0 }, tol: 0.5, pass: ok, asserted: true }
    }
}

/// Aligned `name  value  tol  ok` table.
pub fn check_table(checks: &[Check]) -> String {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!(
            "  {:<w$}  {:>10.3e}  (tol {:.0e})  {}\n",
            c.name,
            c.value,
            c.tol,
            match (c.asserted, c.pass) {
                (false, _) => "info",
                (true, true) => "ok",
                (true, false) => "FAIL",
            }
        ));
    }
    s
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass || !c.asserted)
}

/// Differences between two result trees: integers, strings and booleans must
/// match exactly, floats within `tol` (absolute, or relative above 1).
/// Keys named in `skip` are ignored at every depth.
pub fn diff_values(a: &Value, b: &Value, tol: f64, skip: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    diff_at("$", a, b, tol, skip, &mut out);
    out
}

fn diff_at(path: &str, a: &Value, b: &Value, tol: f64, skip: &[&str], out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for k in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                if skip.contains(&k.as_str()) {
                    continue;
                }
                match (x.get(k), y.get(k)) {
                    (Some(p), Some(q)) => diff_at(&format!("{path}.{k}"), p, q, tol, skip, out),
                    _ => out.push(format!("{path}.{k}: present on one side only")),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} vs {}", x.len(), y.len()));
                return;
            }
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                diff_at(&format!("{path}[{i}]"), p, q, tol, skip, out);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            if let (Some(p), Some(q)) = (x.as_i64(), y.as_i64()) {
                if p != q {
                    out.push(format!("{path}: {p} vs {q}"));
                }
                return;
            }
            let (p, q) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if !((p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0)) {
                out.push(format!("{path}: {p:e} vs {q:e}"));
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: {a} vs {b}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn diff_tolerates_float_noise_only() {
        let a = json!({"n": 3, "x": 1.0, "t": {"wall": 5.0}});
        let b = json!({"n": 3, "x": 1.0 + 1e-14, "t": {"wall": 9.0}});
        assert!(diff_values(&a, &b, 1e-12, &["wall"]).is_empty());
        let c = json!({"n": 4, "x": 1.1, "t": {"wall": 5.0}});
        assert_eq!(diff_values(&a, &c, 1e-12, &["wall"]).len(), 2);
    }

    #[test]
    fn manifest_roundtrip() {
        let mut m = Manifest::new("verify", &["tubewha".into(), "verify".into()], 7);
        m.tolerances.insert("axioms".into(), 1e-9);
        let r = Report { manifest: m.clone(), pass: true, results: json!({}), text: String::new() };
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back.manifest, m);
    }
}
