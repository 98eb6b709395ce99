//! Plain-text and canonical JSON summaries of benchmark runs.

use ctflow_mcp::result::canonical_string;
use ctflow_mcp::Category;
use serde_json::json;

use crate::eval::{AccuracyReport, ToolUsageStats};
use crate::manifest::Scenario;

/// One table row: a configuration name with its scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub accuracy: AccuracyReport,
    pub stats: ToolUsageStats,
}

pub fn configuration_name(disabled: &[Category]) -> String {
    if disabled.is_empty() {
        "full".into()
    } else {
        let names: Vec<&str> = disabled.iter().map(|c| c.as_str()).collect();
        format!("-{}", names.join(",-"))
    }
}

const HEADER: [&str; 8] = ["Configuration", "QA", "AM", "DD", "Avg.", "Calls", "Name Errors", "Args Errors"];

/// Fixed-width table: accuracy columns in percent, then per-case tool usage.
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut cells: Vec<Vec<String>> = vec![HEADER.iter().map(|s| s.to_string()).collect()];
    for r in rows {
        let mut line = vec![r.name.clone()];
        for s in Scenario::ALL {
            line.push(r.accuracy.per_scenario.get(&s).map_or("-".into(), |v| format!("{v:.2}")));
        }
        line.push(format!("{:.2}", r.accuracy.average));
        line.push(format!("{:.3}", r.stats.avg_calls));
        line.push(format!("{:.3}", r.stats.avg_name_errors));
        line.push(format!("{:.3}", r.stats.avg_args_errors));
        cells.push(line);
    }
    let widths: Vec<usize> = (0..HEADER.len()).map(|c| cells.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (n, line) in cells.iter().enumerate() {
        let padded: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, &w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
        if n == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out
}

pub fn render_json(rows: &[ReportRow]) -> String {
    let rows: Vec<_> = rows
        .iter()
        .map(|r| json!({"configuration": r.name, "accuracy": r.accuracy, "tool_usage": r.stats}))
        .collect();
    canonical_string(&json!({"rows": rows}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn table_layout() {
        let row = ReportRow {
            name: configuration_name(&[Category::Global, Category::Advanced]),
            accuracy: AccuracyReport::from_columns(BTreeMap::from([(Scenario::QA, 50.0)]), 4),
            stats: ToolUsageStats { cases: 4, avg_calls: 4.0, avg_name_errors: 0.5, avg_args_errors: 0.0 },
        };
        let t = render_table(&[row]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("Configuration"));
        assert!(lines[0].ends_with("Calls  Name Errors  Args Errors"));
        assert!(lines[2].starts_with("-global,-advanced"));
        assert!(lines[2].contains(" - "));
        assert!(lines[2].ends_with("4.000        0.500        0.000"));
    }
}
