//! Task manifests: JSON-lines, one case per line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Component, Path};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agent::ToolCall;
use crate::episode::TaskPrompt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Quantitative analysis.
    QA,
    /// Spatial mapping.
    AM,
    /// Diagnostic inference.
    DD,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::QA, Scenario::AM, Scenario::DD];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseType {
    /// Atomic: one tool answers it.
    A,
    /// Logical: a fixed chain of tools.
    B,
    /// Autonomous: open-ended exploration.
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskCase {
    pub id: String,
    pub scenario: Scenario,
    pub case_type: CaseType,
    pub volume_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<String>,
    pub query: String,
    /// Label (`A`, `B`, ...) to option text.
    pub options: BTreeMap<String, String>,
    pub answer_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sop: Option<Vec<ToolCall>>,
}

impl TaskCase {
    pub fn prompt(&self) -> TaskPrompt {
        TaskPrompt { case_id: self.id.clone(), query: self.query.clone(), options: self.options.clone() }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("case serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("manifest line {line}, field {field}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

pub const MIN_OPTIONS: usize = 2;
pub const MAX_OPTIONS: usize = 5;

/// `A`, `B`, ... for `n` options.
pub fn option_labels(n: usize) -> Vec<String> {
    (b'A'..).take(n).map(|c| (c as char).to_string()).collect()
}

fn relative_inside(p: &str) -> bool {
    !p.is_empty() && Path::new(p).components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

fn check(case: &TaskCase) -> Result<(), (&'static str, String)> {
    if case.id.trim().is_empty() {
        return Err(("id", "must be non-empty".into()));
    }
    if case.query.trim().is_empty() {
        return Err(("query", "must be non-empty".into()));
    }
    let n = case.options.len();
    if !(MIN_OPTIONS..=MAX_OPTIONS).contains(&n) {
        return Err(("options", format!("{n} options, expected {MIN_OPTIONS} to {MAX_OPTIONS}")));
    }
    if case.options.keys().cloned().collect::<Vec<_>>() != option_labels(n) {
        return Err(("options", "labels must run A, B, ... without gaps".into()));
    }
    if !case.options.contains_key(&case.answer_key) {
        return Err(("answer_key", format!("'{}' is not an option label", case.answer_key)));
    }
    if !relative_inside(&case.volume_path) {
        return Err(("volume_path", "must be a relative path inside the data root".into()));
    }
    if case.mask_path.as_deref().is_some_and(|m| !relative_inside(m)) {
        return Err(("mask_path", "must be a relative path inside the data root".into()));
    }
    if let Some(sop) = &case.sop {
        if sop.iter().any(|c| !matches!(c.args, Value::Object(_))) {
            return Err(("sop", "every call needs an arguments object".into()));
        }
    }
    Ok(())
}

pub fn load_task_manifest(bytes: &[u8]) -> Result<Vec<TaskCase>, ManifestError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| ManifestError { line: 0, field: "<utf8>".into(), message: e.to_string() })?;
    let mut cases = Vec::new();
    let mut ids = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |field: &str, message: String| ManifestError { line: line_no, field: field.into(), message };
        let case: TaskCase = serde_json::from_str(line).map_err(|e| {
            let msg = e.to_string();
            // serde names the offending field in backticks
            let field = msg.split('`').nth(1).unwrap_or("<json>").to_string();
            err(&field, msg)
        })?;
        check(&case).map_err(|(field, message)| err(field, message))?;
        if !ids.insert(case.id.clone()) {
            return Err(err("id", format!("duplicate id '{}'", case.id)));
        }
        cases.push(case);
    }
    Ok(cases)
}

pub fn write_task_manifest(cases: &[TaskCase]) -> String {
    cases.iter().map(|c| c.to_json_line() + "\n").collect()
}
