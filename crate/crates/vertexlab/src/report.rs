//! Check reports and their JSON/CSV output.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable naming the default report directory.
pub const OUTPUT_DIR_ENV: &str = "VERTEXLAB_OUT";

/// Outcome of one verification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: serde_json::Value,
    pub pass: bool,
    /// One line describing the decisive quantity.
    pub summary: String,
    pub metrics: serde_json::Value,
    /// Failing assertions, in evaluation order.
    pub failures: Vec<String>,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub elapsed_s: f64,
}

impl CheckReport {
    pub fn new(check: &str, params: serde_json::Value) -> Self {
        Self {
            check: check.into(),
            params,
            pass: true,
            summary: String::new(),
            metrics: serde_json::json!({}),
            failures: Vec::new(),
            elapsed_s: 0.0,
        }
    }

    /// Record an assertion; a false `ok` marks the report failed.
    pub fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.failures.push(what.into());
        }
    }

    pub fn metric(&mut self, key: &str, v: impl Serialize) {
        if let serde_json::Value::Object(m) = &mut self.metrics {
            m.insert(key.into(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null));
        }
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }

    /// `PASS check: summary`.
    pub fn line(&self) -> String {
        format!("{} {}: {}", self.status(), self.check, self.summary)
    }
}

/// Time a closure and stamp the report with its duration.
pub fn timed(f: impl FnOnce() -> Result<CheckReport>) -> Result<CheckReport> {
    let t = std::time::Instant::now();
    let mut r = f()?;
    r.elapsed_s = t.elapsed().as_secs_f64();
    Ok(r)
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Invalid(e.to_string()))
}

/// Directory from `explicit`, else the environment variable, else `.`.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn write_text(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Invalid(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    std::fs::write(&p, body).map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?;
    Ok(p)
}

/// CSV from a header and rows of already formatted cells.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}
