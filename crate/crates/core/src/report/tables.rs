use std::fmt::Write as _;

use super::format::{improvement_cell, value_cell};
use super::ReportError;
use crate::pipeline::ImprovementReport;

const HEADER: [&str; 4] = ["Metric", "Baseline", "Framework", "Improvement"];

/// Display cells of every row, in table order.
pub fn table_cells(report: &ImprovementReport) -> Vec<[String; 4]> {
    report
        .rows
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                value_cell(r, r.baseline),
                value_cell(r, r.framework),
                improvement_cell(r),
            ]
        })
        .collect()
}

pub fn render_markdown(report: &ImprovementReport) -> String {
    let mut out = String::new();
    out.push_str("# Baseline vs framework\n\n");
    let _ = writeln!(out, "| {} |", HEADER.join(" | "));
    out.push_str("|---|---:|---:|---:|\n");
    for cells in table_cells(report) {
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out.push_str("\n## Annotations\n\n");
    if report.annotations.is_empty() {
        out.push_str("None.\n");
    }
    for a in &report.annotations {
        let _ = writeln!(out, "- {}", a.text);
    }
    out.push_str("\n## Notes\n\n");
    for n in &report.notes {
        let _ = writeln!(out, "- {n}");
    }
    out
}

pub fn render_csv(report: &ImprovementReport) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(ReportError::csv)?;
    for cells in table_cells(report) {
        w.write_record(&cells).map_err(ReportError::csv)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::csv(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
}
