//! Suite validation: every `*.json` config in a directory is run and its
//! `expect` entries are checked against the report document.
//!
//! An expectation names a JSON pointer into the report and one of
//! `equals` (exact JSON equality), `approx` (with `rel_tol`, default
//! 1e-9), `at_most` or `at_least`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::commands::{execute, usage, Report};
use crate::config;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Expectation {
    pointer: String,
    #[serde(default)]
    equals: Option<Value>,
    #[serde(default)]
    approx: Option<f64>,
    #[serde(default)]
    rel_tol: Option<f64>,
    #[serde(default)]
    at_most: Option<f64>,
    #[serde(default)]
    at_least: Option<f64>,
}

impl Expectation {
    /// `None` when satisfied, otherwise a description of the mismatch.
    fn check(&self, doc: &Value) -> Option<String> {
        let Some(found) = doc.pointer(&self.pointer) else {
            return Some(format!("{}: missing", self.pointer));
        };
        let number = found.as_f64();
        let fail = |what: String| Some(format!("{}: {what}, found {found}", self.pointer));
        if let Some(want) = &self.equals {
            if found != want {
                return fail(format!("expected {want}"));
            }
        }
        if let Some(want) = self.approx {
            let tol = self.rel_tol.unwrap_or(1e-9) * want.abs().max(f64::MIN_POSITIVE);
            if !number.is_some_and(|x| (x - want).abs() <= tol) {
                return fail(format!("expected {want} within relative {:e}", self.rel_tol.unwrap_or(1e-9)));
            }
        }
        if let Some(max) = self.at_most {
            if !number.is_some_and(|x| x <= max) {
                return fail(format!("expected at most {max}"));
            }
        }
        if let Some(min) = self.at_least {
            if !number.is_some_and(|x| x >= min) {
                return fail(format!("expected at least {min}"));
            }
        }
        None
    }
}

fn run_one(path: &Path) -> Result<Vec<String>> {
    let cfg = config::load(path)?;
    let command = cfg
        .command
        .ok_or_else(|| usage("suite configs must name a `command`"))?;
    let expectations: Vec<Expectation> = match cfg.expect {
        Some(v) => serde_json::from_value(v).map_err(|e| usage(format!("invalid `expect`: {e}")))?,
        None => Vec::new(),
    };
    if expectations.is_empty() {
        return Err(usage("suite configs need a non-empty `expect` list"));
    }
    let doc = execute(&command, cfg.params)?.document();
    Ok(expectations.iter().filter_map(|e| e.check(&doc)).collect())
}

fn suite_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading suite directory {}", dir.display()))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    if files.is_empty() {
        return Err(usage(format!("no *.json configs in {}", dir.display())));
    }
    Ok(files)
}

/// Runs the suite in `dir`. A config that errors counts as failed.
pub fn validate(dir: &Path) -> Result<Report> {
    let files = suite_files(dir)?;
    let mut entries = Vec::new();
    let mut failed = 0;
    for path in &files {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let entry = match run_one(path) {
            Ok(failures) => {
                let passed = failures.is_empty();
                json!({ "file": name, "passed": passed, "failures": failures })
            }
            Err(e) => json!({ "file": name, "passed": false, "error": format!("{e:#}") }),
        };
        failed += usize::from(entry["passed"] == false);
        entries.push(entry);
    }
    Ok(Report {
        command: "validate",
        config: json!({ "dir": dir }),
        result: json!({
            "configs": files.len(),
            "failed": failed,
            "reports": entries,
        }),
        verdict: Some(failed == 0),
        lines: None,
        table: None,
        default_format: crate::args::Format::Json,
    })
}
